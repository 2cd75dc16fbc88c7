#include "mmrelax/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mmrelax {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw std::invalid_argument(key + ": not a number: '" + value + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw std::invalid_argument(key + ": not an integer: '" + value + "'");
  }
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // prefer the short form when it round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

std::string tau_to_string(const TauPolicy& tau) {
  if (tau.kind == TauPolicy::Kind::fixed) {
    return "fixed:" + format_double(tau.tau);
  }
  return "adaptive:" + format_double(tau.tau_o) + "," +
         format_double(tau.tau_min) + "," + format_double(tau.tau_max);
}

TauPolicy tau_from_string(const std::string& text) {
  if (text.rfind("fixed:", 0) == 0) {
    return TauPolicy::fixed_value(parse_double("tau", text.substr(6)));
  }
  if (text == "adaptive") {
    return TauPolicy::adaptive();
  }
  if (text.rfind("adaptive:", 0) == 0) {
    const auto parts = split(text.substr(9), ',');
    TauPolicy tau = TauPolicy::adaptive();
    if (parts.size() == 1) {
      tau.tau_o = parse_double("tau_o", parts[0]);
    } else if (parts.size() == 3) {
      tau.tau_o = parse_double("tau_o", parts[0]);
      tau.tau_min = parse_double("tau_min", parts[1]);
      tau.tau_max = parse_double("tau_max", parts[2]);
    } else {
      throw std::invalid_argument(
          "tau: expected adaptive[:<tau_o>[,<min>,<max>]]");
    }
    return tau;
  }
  throw std::invalid_argument("tau: expected fixed:<value> or adaptive[...]");
}

std::map<std::string, std::string> config_to_map(const RunConfig& c) {
  std::map<std::string, std::string> m;
  m["N"] = std::to_string(c.n_intervals);
  m["mmpde"] = (c.variant == MmpdeVariant::mmpde6) ? "6" : "4";
  m["tau"] = tau_to_string(c.tau);
  m["gamma"] = format_double(c.smoothing.gamma);
  m["ip"] = std::to_string(c.smoothing.ip);
  m["rtol"] = format_double(c.rtol);
  m["atol"] = format_double(c.atol);
  m["monitor_floor"] = format_double(c.monitor_floor);
  m["t_end"] = format_double(c.t_end);
  std::string decades;
  for (std::size_t i = 0; i < c.snapshot_decades.size(); ++i) {
    if (i) decades += ",";
    decades += std::to_string(c.snapshot_decades[i]);
  }
  m["snapshot_decades"] = decades;
  m["max_order"] = std::to_string(c.max_order);
  m["initial_step"] = format_double(c.initial_step);
  m["min_step"] = format_double(c.min_step);
  m["max_failures"] = std::to_string(c.max_failures);
  m["max_newton"] = std::to_string(c.max_newton);
  m["record_trajectory"] = c.record_trajectory ? "1" : "0";
  return m;
}

void apply_config_entry(RunConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "N") {
    c.n_intervals = parse_int(key, value);
  } else if (key == "mmpde") {
    if (value == "4") {
      c.variant = MmpdeVariant::mmpde4;
    } else if (value == "6") {
      c.variant = MmpdeVariant::mmpde6;
    } else {
      throw std::invalid_argument("mmpde: expected 4 or 6");
    }
  } else if (key == "tau") {
    c.tau = tau_from_string(value);
  } else if (key == "gamma") {
    c.smoothing.gamma = parse_double(key, value);
  } else if (key == "ip") {
    c.smoothing.ip = parse_int(key, value);
  } else if (key == "rtol") {
    c.rtol = parse_double(key, value);
  } else if (key == "atol") {
    c.atol = parse_double(key, value);
  } else if (key == "monitor_floor") {
    c.monitor_floor = parse_double(key, value);
  } else if (key == "t_end") {
    c.t_end = parse_double(key, value);
  } else if (key == "snapshot_decades") {
    c.snapshot_decades.clear();
    if (!value.empty()) {
      for (const auto& part : split(value, ',')) {
        c.snapshot_decades.push_back(parse_int(key, part));
      }
    }
  } else if (key == "max_order") {
    c.max_order = parse_int(key, value);
  } else if (key == "initial_step") {
    c.initial_step = parse_double(key, value);
  } else if (key == "min_step") {
    c.min_step = parse_double(key, value);
  } else if (key == "max_failures") {
    c.max_failures = parse_int(key, value);
  } else if (key == "max_newton") {
    c.max_newton = parse_int(key, value);
  } else if (key == "record_trajectory") {
    c.record_trajectory = (value != "0");
  } else {
    throw std::invalid_argument("unknown config key: '" + key + "'");
  }
}

RunConfig config_from_map(const std::map<std::string, std::string>& entries) {
  RunConfig c;
  for (const auto& [key, value] : entries) {
    apply_config_entry(c, key, value);
  }
  return c;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config file not readable: " + path);
  }
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return (b == std::string::npos) ? std::string{}
                                      : s.substr(b, e - b + 1);
    };
    entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return entries;
}

}  // namespace mmrelax
