#include "model/config.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "core/tensor.h"

namespace stvsr {
namespace model {

void ModelConfig::validate() const {
  if (channels < 1) throw ConfigError("config: channels must be >= 1");
  if (units < 1) throw ConfigError("config: units must be >= 1");
  if (scale != 2 && scale != 4 && scale != 8)
    throw ConfigError("config: scale must be one of {2,4,8}");
  if (pyramid_levels < 1) throw ConfigError("config: pyramid_levels must be >= 1");
  if (deform_groups < 1 || channels % deform_groups != 0)
    throw ConfigError("config: deform_groups must divide channels");
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("config: kernel must be odd");
  if (fusion_resblocks < 0) throw ConfigError("config: fusion_resblocks must be >= 0");
  if (fe_resblocks < 0) throw ConfigError("config: fe_resblocks must be >= 0");
  if (variant < 'a' || variant > 'd') throw ConfigError("config: variant must be a..d");
}

void Schedule::validate() const {
  if (base_lr <= 0) throw ConfigError("schedule: base_lr must be positive");
  if (decay_factor <= 0 || decay_factor >= 1)
    throw ConfigError("schedule: decay_factor must be in (0,1)");
  if (decay_every < 1) throw ConfigError("schedule: decay_every must be >= 1");
  if (total_epochs < 1) throw ConfigError("schedule: total_epochs must be >= 1");
}

double lr_at(const Schedule& s, int epoch) {
  return s.base_lr * std::pow(s.decay_factor, double(epoch / s.decay_every));
}

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean value '" + v + "'");
}

}  // namespace

void apply_config_line(RunConfig& rc, const std::string& key, const std::string& value) {
  try {
    if (key == "channels") rc.model.channels = std::stoi(value);
    else if (key == "units") rc.model.units = std::stoi(value);
    else if (key == "scale") rc.model.scale = std::stoi(value);
    else if (key == "pyramid_levels") rc.model.pyramid_levels = std::stoi(value);
    else if (key == "deform_groups") rc.model.deform_groups = std::stoi(value);
    else if (key == "kernel") rc.model.kernel = std::stoi(value);
    else if (key == "fusion_resblocks") rc.model.fusion_resblocks = std::stoi(value);
    else if (key == "fe_resblocks") rc.model.fe_resblocks = std::stoi(value);
    else if (key == "use_modulation") rc.model.use_modulation = parse_bool(value);
    else if (key == "variant") {
      if (value.size() != 1) throw ConfigError("config: variant must be a..d");
      rc.model.variant = value[0];
    } else if (key == "plain_blocks") rc.model.plain_blocks = std::stoi(value);
    else if (key == "base_lr") rc.schedule.base_lr = std::stod(value);
    else if (key == "decay_factor") rc.schedule.decay_factor = std::stod(value);
    else if (key == "decay_every") rc.schedule.decay_every = std::stoi(value);
    else if (key == "total_epochs") rc.schedule.total_epochs = std::stoi(value);
    else if (key == "batch") rc.train.batch = std::stoi(value);
    else if (key == "patch") rc.train.patch = std::stoi(value);
    else if (key == "seed") rc.train.seed = std::stoull(value);
    else if (key == "max_steps") rc.train.max_steps = std::stoi(value);
    else if (key == "val_triplets") rc.train.val_triplets = std::stoi(value);
    else throw ConfigError("config: unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw ConfigError("config: bad value '" + value + "' for key '" + key + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("config: value out of range for key '" + key + "'");
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  RunConfig rc;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (blank) continue;
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
    }
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    apply_config_line(rc, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return rc;
}

std::string run_config_to_text(const RunConfig& rc) {
  std::ostringstream os;
  os << "channels = " << rc.model.channels << "\n"
     << "units = " << rc.model.units << "\n"
     << "scale = " << rc.model.scale << "\n"
     << "pyramid_levels = " << rc.model.pyramid_levels << "\n"
     << "deform_groups = " << rc.model.deform_groups << "\n"
     << "kernel = " << rc.model.kernel << "\n"
     << "fusion_resblocks = " << rc.model.fusion_resblocks << "\n"
     << "fe_resblocks = " << rc.model.fe_resblocks << "\n"
     << "use_modulation = " << (rc.model.use_modulation ? "true" : "false") << "\n"
     << "variant = " << rc.model.variant << "\n"
     << "plain_blocks = " << rc.model.plain_blocks << "\n"
     << "base_lr = " << rc.schedule.base_lr << "\n"
     << "decay_factor = " << rc.schedule.decay_factor << "\n"
     << "decay_every = " << rc.schedule.decay_every << "\n"
     << "total_epochs = " << rc.schedule.total_epochs << "\n"
     << "batch = " << rc.train.batch << "\n"
     << "patch = " << rc.train.patch << "\n"
     << "seed = " << rc.train.seed << "\n"
     << "max_steps = " << rc.train.max_steps << "\n"
     << "val_triplets = " << rc.train.val_triplets << "\n";
  return os.str();
}

}  // namespace model
}  // namespace stvsr
