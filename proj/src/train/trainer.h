#pragma once

#include <memory>

#include "data/dataset.h"
#include "metrics/metrics.h"
#include "model/loss.h"
#include "train/checkpoint.h"

namespace stvsr {
namespace train {

// --data argument: "synth:N" or "synth:N:HxW" (HR dims) or a directory with a
// sequences/ tree and a split list.
struct DataSpec {
  enum class Kind { synth, dir } kind = Kind::synth;
  size_t count = 0;
  int hr_h = 0, hr_w = 0;  // 0 = derived from scale (LR 32x32)
  std::string root;
  std::string list;  // split list path; empty = auto-detect in root
};

DataSpec parse_data_spec(const std::string& arg);
std::unique_ptr<data::TripletSource> open_source(const DataSpec& spec,
                                                 const model::ModelConfig& cfg,
                                                 uint64_t seed, bool abort_on_error);

struct EvalResult {
  // three protocols: st_vsr scores H_t, s_vsr scores H_0, t_vsr scores L_t
  std::vector<std::pair<std::string, std::vector<metrics::MetricRow>>> groups;
  std::vector<metrics::GroupSummary> summaries;
  std::vector<double> unit_err_rms;  // mean RMS of the LR residual e per UPU

  double aggregate(const std::string& group, char metric) const;  // 'p','s','i'
};

EvalResult evaluate(const model::Network<float>& net, const data::TripletSource& src,
                    const metrics::MetricOptions& mopt = metrics::MetricOptions());

struct TrainResult {
  std::vector<double> step_losses;
  std::string csv;
  double best_val_psnr = -1.0;
  int64_t steps = 0;
  int epochs = 0;
  std::string last_dir, best_dir;
};

// Runs the optimization loop: epochs of shuffled batches through
// forward/loss/backward/AdaMax with the staircase LR schedule, per-epoch
// validation, CSV logging and last/best checkpoints under out_dir (when set).
// val_every 0 disables periodic validation. Aborts with TrainAbort when the
// loss goes non-finite, keeping the last checkpoint on disk.
TrainResult train(const model::RunConfig& rc, const data::TripletSource& train_src,
                  const data::TripletSource* val_src, int val_every = 1);

// Resume variant: restores parameters/optimizer/counters from a checkpoint
// directory and continues until the step/epoch budget is reached.
// override_max_steps extends the stored budget (-1 keeps it).
TrainResult train_resume(const std::string& ckpt_dir, const data::TripletSource& train_src,
                         const data::TripletSource* val_src, int val_every = 1,
                         const std::string& out_dir = "", int override_max_steps = -1);

// Dead-subgraph detector: parameters whose gradient never became nonzero over
// `batches` random batches. The zero-initialized offset heads block upstream
// gradients until they move, so detection runs after `warmup_steps` optimizer
// steps.
std::vector<std::string> dead_params(model::Network<float>& net,
                                     const data::TripletSource& src,
                                     const model::RunConfig& rc, int batches,
                                     int warmup_steps = 1);

// Plain-interpolation reference: H_t approximated by the bicubic upscale of
// the averaged LR inputs. Returns mean PSNR over the source.
double baseline_psnr_ht(const data::TripletSource& src, int scale);

}  // namespace train
}  // namespace stvsr
