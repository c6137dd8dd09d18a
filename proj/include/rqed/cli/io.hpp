#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rqed/errors.hpp"

namespace rqed::cli {

/// 17 significant digits, enough to round-trip any double.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Header plus rows, each a comma-joined line without the newline.
struct Table {
  std::string header;
  std::vector<std::string> rows;

  std::string str() const {
    std::string out = header + "\n";
    for (const auto& r : rows) out += r + "\n";
    return out;
  }
};

struct Artifact {
  std::string name;
  std::string content;
};

/// Writes every artifact to a temporary name first and renames only once all
/// of them are on disk, so a failure leaves no partial set behind.
inline void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());

  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& a : files) {
    const fs::path tmp = dir / (a.name + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    temps.push_back(tmp);
    out.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
    out.close();
    if (!out) {
      cleanup();
      throw ValidationError("cannot write " + tmp.string());
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(temps[i], dir / files[i].name, ec);
    if (ec) {
      cleanup();
      throw ValidationError("cannot move " + temps[i].string() + " into place: " + ec.message());
    }
  }
}

}  // namespace rqed::cli
