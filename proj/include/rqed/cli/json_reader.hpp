#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "rqed/constants.hpp"
#include "rqed/errors.hpp"

namespace rqed::cli {

using nlohmann::json;

inline std::string pointer_join(const std::string& path, const std::string& key) {
  return path + "/" + key;
}

inline std::string pointer_join(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

[[noreturn]] inline void fail_at(const std::string& path, const std::string& what) {
  throw ValidationError("config " + (path.empty() ? std::string("/") : path) + ": " + what);
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail_at(path, "expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail_at(path, "number must be finite");
  return v;
}

inline std::uint64_t as_uint(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) fail_at(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0.0 && v == std::floor(v) && v < 1.8e19) return static_cast<std::uint64_t>(v);
  }
  fail_at(path, "expected a non-negative integer");
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail_at(path, "expected a string, got " + std::string(j.type_name()));
  return j.get<std::string>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail_at(path, "expected true or false");
  return j.get<bool>();
}

inline const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail_at(path, "expected an array, got " + std::string(j.type_name()));
  return j;
}

inline Vector3d as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail_at(path, "expected an array of 3 numbers");
  return {as_number(j[0], pointer_join(path, 0)), as_number(j[1], pointer_join(path, 1)),
          as_number(j[2], pointer_join(path, 2))};
}

/// A complex number as a plain number or a [re, im] pair.
inline Complex as_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {as_number(j, path), 0.0};
  if (j.is_array() && j.size() == 2) {
    return {as_number(j[0], pointer_join(path, 0)), as_number(j[1], pointer_join(path, 1))};
  }
  fail_at(path, "expected a number or a [re, im] pair");
}

inline std::vector<double> as_numbers(const json& j, const std::string& path) {
  as_array(j, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], pointer_join(path, i)));
  return out;
}

/// Reads keys of one JSON object and rejects any key that was never asked
/// for once finish() is called.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail_at(path_, "expected an object, got " + std::string(j_.type_name()));
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return pointer_join(path_, key); }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* find(const std::string& key) {
    consumed_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) fail_at(path_, "missing required key '" + key + "'");
    return *v;
  }

  double number(const std::string& key, double def) {
    const json* v = find(key);
    return v ? as_number(*v, at(key)) : def;
  }
  double number(const std::string& key) { return as_number(require(key), at(key)); }

  std::optional<double> optional_number(const std::string& key) {
    const json* v = find(key);
    if (!v || v->is_null()) return std::nullopt;
    return as_number(*v, at(key));
  }

  std::uint64_t uint(const std::string& key, std::uint64_t def) {
    const json* v = find(key);
    return v ? as_uint(*v, at(key)) : def;
  }
  std::uint64_t uint(const std::string& key) { return as_uint(require(key), at(key)); }

  std::string string(const std::string& key, const std::string& def) {
    const json* v = find(key);
    return v ? as_string(*v, at(key)) : def;
  }
  std::string string(const std::string& key) { return as_string(require(key), at(key)); }

  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    return v ? as_bool(*v, at(key)) : def;
  }

  Vector3d vec3(const std::string& key, const Vector3d& def) {
    const json* v = find(key);
    return v ? as_vec3(*v, at(key)) : def;
  }
  Vector3d vec3(const std::string& key) { return as_vec3(require(key), at(key)); }

  ObjectReader object(const std::string& key) { return ObjectReader(require(key), at(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!consumed_.count(it.key())) fail_at(at(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> consumed_;
};

/// Overrides from a `constants` object; keys are the field names.
inline PhysicalConstants read_constants(const json* j, const std::string& path) {
  PhysicalConstants k;
  if (!j) return k;
  ObjectReader r(*j, path);
  k.hbar = r.number("hbar", k.hbar);
  k.k_B = r.number("k_B", k.k_B);
  k.eps0 = r.number("eps0", k.eps0);
  k.mu0 = r.number("mu0", k.mu0);
  k.c = r.number("c", k.c);
  k.eps_w = r.number("eps_w", k.eps_w);
  k.t_dec = r.number("t_dec", k.t_dec);
  r.finish();
  validate(k);
  return k;
}

}  // namespace rqed::cli
