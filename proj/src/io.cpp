#include "codedcache/io.hpp"

#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "codedcache/numeric.hpp"

namespace codedcache {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string curve_to_csv(const TradeoffCurve& curve) {
  std::string out = "r_c,r_u\n";
  for (const auto& pt : curve.points) {
    out += format_double(pt.r_c);
    out += ',';
    out += format_double(pt.r_u);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
nlohmann::json allocation_json(const PopularityProfile& profile, const std::vector<T>& sorted_r, int users) {
  if (static_cast<int>(sorted_r.size()) != profile.size())
    throw std::invalid_argument("allocation has " + std::to_string(sorted_r.size()) + " files, profile has " +
                                std::to_string(profile.size()));
  std::vector<T> original(sorted_r.size());
  for (int i = 0; i < profile.size(); ++i) original[profile.permutation()[i]] = sorted_r[i];
  nlohmann::json j;
  j["schema"] = 1;
  j["users"] = users;
  j["r"] = original;
  return j;
}

nlohmann::json parse_allocation(const std::string& text, const PopularityProfile& profile, int* users_out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("allocation: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("users") || !j.contains("r"))
    throw std::invalid_argument("allocation: expected a JSON object with \"users\" and \"r\"");
  if (!j["users"].is_number_integer()) throw std::invalid_argument("allocation: \"users\" must be an integer");
  if (!j["r"].is_array()) throw std::invalid_argument("allocation: \"r\" must be an array");
  if (static_cast<int>(j["r"].size()) != profile.size())
    throw std::invalid_argument("allocation: \"r\" holds " + std::to_string(j["r"].size()) +
                                " entries, profile has " + std::to_string(profile.size()));
  *users_out = j["users"].get<int>();
  return j;
}

}  // namespace

std::string allocation_to_json(const PopularityProfile& profile, const IntegerAllocation& alloc) {
  alloc.validate();
  return allocation_json(profile, alloc.r, alloc.users).dump();
}

std::string allocation_to_json(const PopularityProfile& profile, const FractionalAllocation& alloc, int users) {
  alloc.validate();
  return allocation_json(profile, alloc.r, users).dump();
}

IntegerAllocation integer_allocation_from_json(const std::string& text, const PopularityProfile& profile) {
  int users = 0;
  const nlohmann::json j = parse_allocation(text, profile, &users);
  IntegerAllocation alloc;
  alloc.users = users;
  alloc.r.resize(profile.size());
  for (int original = 0; original < profile.size(); ++original) {
    const auto& entry = j["r"][static_cast<std::size_t>(original)];
    if (!entry.is_number())
      throw std::invalid_argument("allocation: entry " + std::to_string(original + 1) + " is not a number");
    const double v = entry.get<double>();
    const double rounded = std::nearbyint(v);
    if (std::abs(v - rounded) > 1e-9)
      throw std::invalid_argument("allocation: entry " + std::to_string(original + 1) + " = " +
                                  std::to_string(v) + " is not an integer copy count");
    alloc.r[profile.inverse_permutation()[original]] = static_cast<int>(rounded);
  }
  alloc.validate();
  return alloc;
}

FractionalAllocation fractional_allocation_from_json(const std::string& text, const PopularityProfile& profile) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("allocation: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("r") || !j["r"].is_array())
    throw std::invalid_argument("allocation: expected a JSON object with an \"r\" array");
  if (static_cast<int>(j["r"].size()) != profile.size())
    throw std::invalid_argument("allocation: \"r\" holds " + std::to_string(j["r"].size()) +
                                " entries, profile has " + std::to_string(profile.size()));
  FractionalAllocation alloc;
  alloc.r.resize(profile.size());
  for (int original = 0; original < profile.size(); ++original) {
    const auto& entry = j["r"][static_cast<std::size_t>(original)];
    if (!entry.is_number())
      throw std::invalid_argument("allocation: entry " + std::to_string(original + 1) + " is not a number");
    alloc.r[profile.inverse_permutation()[original]] = entry.get<double>();
  }
  alloc.validate();
  return alloc;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
  std::error_code ec;
  if (!fs::exists(dir, ec))
    throw IoError("cannot write '" + path + "': directory '" + dir.string() + "' does not exist");

  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IoError("cannot write '" + path + "': " + std::strerror(errno) +
                    " (check the directory exists and is writable)");
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("short write to '" + tmp.string() + "': " + std::strerror(errno));
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace codedcache
