#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gttf {

// Ordered key=value document; the exchange format for every audit.
struct Report {
  std::vector<std::pair<std::string, std::string>> items;

  void add(const std::string& key, const std::string& value) {
    items.emplace_back(key, value);
  }
  void add(const std::string& key, const char* value) {
    items.emplace_back(key, std::string(value));
  }
  void add(const std::string& key, double value) {
    std::ostringstream os;
    os << std::setprecision(12) << value;
    items.emplace_back(key, os.str());
  }
  void add(const std::string& key, bool value) {
    items.emplace_back(key, value ? "true" : "false");
  }
  void add(const std::string& key, std::uint64_t value) {
    items.emplace_back(key, std::to_string(value));
  }
  void add(const std::string& key, int value) {
    items.emplace_back(key, std::to_string(value));
  }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& [k, v] : items)
      if (k == key) return v;
    return std::nullopt;
  }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : items) out << k << '=' << v << '\n';
  }

  std::string str() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    write(out);
  }
};

}  // namespace gttf
