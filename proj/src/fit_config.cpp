#include <sstream>

#include "mpiv/fit.h"

namespace mpiv {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

FitConfig parse_fit_config(const std::string& text, FitConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("fit config line " + std::to_string(line_number) +
                                  ": expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "variant") {
        base.variant = parse_color_variant(value);
      } else if (key == "steps") {
        base.steps = std::stoi(value);
      } else if (key == "learning_rate" || key == "lr") {
        base.learning_rate = std::stod(value);
      } else if (key == "beta1") {
        base.beta1 = std::stod(value);
      } else if (key == "beta2") {
        base.beta2 = std::stod(value);
      } else if (key == "epsilon") {
        base.epsilon = std::stod(value);
      } else if (key == "loss") {
        if (value != "l1") throw std::invalid_argument("unknown loss: " + value);
        base.loss = LossKind::kL1;
      } else if (key == "seed") {
        base.seed = std::stoull(value);
      } else if (key == "log_every") {
        base.log_every = std::stoi(value);
      } else if (key == "gradient_loss_weight") {
        base.gradient_loss_weight = std::stod(value);
      } else if (key == "psv_alpha_init") {
        base.psv_alpha_init = value == "1" || value == "true" || value == "yes";
      } else {
        throw std::invalid_argument("unknown key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("fit config line " + std::to_string(line_number) +
                                  ": bad value for " + key);
    }
  }
  base.validate();
  return base;
}

std::string serialize_fit_config(const FitConfig& config) {
  std::ostringstream out;
  out << "variant = " << to_string(config.variant) << "\n";
  out << "steps = " << config.steps << "\n";
  out << "learning_rate = " << config.learning_rate << "\n";
  out << "beta1 = " << config.beta1 << "\n";
  out << "beta2 = " << config.beta2 << "\n";
  out << "epsilon = " << config.epsilon << "\n";
  out << "loss = l1\n";
  out << "seed = " << config.seed << "\n";
  out << "log_every = " << config.log_every << "\n";
  out << "gradient_loss_weight = " << config.gradient_loss_weight << "\n";
  out << "psv_alpha_init = " << (config.psv_alpha_init ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace mpiv
