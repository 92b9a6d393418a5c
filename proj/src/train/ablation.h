#pragma once

#include "train/trainer.h"

namespace stvsr {
namespace train {

struct AblationRow {
  std::string label;  // "variant_a".."variant_d" or "M=2".."M=10"
  int64_t params = 0;
  bool trained = false;
  double psnr_ht = 0, ssim_ht = 0, ie_ht = 0, psnr_h0 = 0, psnr_lt = 0;
};

// Trains each requested variant under the identical budget/seed and evaluates
// on the validation source. Variants reuse the base config; only the graph
// changes.
std::vector<AblationRow> run_variants(const std::string& variants,
                                      const model::RunConfig& base,
                                      const data::TripletSource& train_src,
                                      const data::TripletSource& val_src);

// Builds one model per M and reports parameter counts; trains and evaluates
// only when steps > 0.
std::vector<AblationRow> sweep_units(const std::vector<int>& unit_counts,
                                     const model::RunConfig& base,
                                     const data::TripletSource* train_src,
                                     const data::TripletSource* val_src);

std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace train
}  // namespace stvsr
