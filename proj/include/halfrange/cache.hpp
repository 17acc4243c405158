#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "halfrange/detail/hash.hpp"
#include "halfrange/errors.hpp"
#include "halfrange/krein.hpp"
#include "halfrange/model.hpp"

namespace halfrange {
namespace cache {

constexpr char kMagic[4] = {'H', 'R', 'K', 'C'};
constexpr std::uint32_t kVersion = 1;

inline std::string decomposition_path(const std::string& dir,
                                      std::uint64_t model_hash) {
  return (std::filesystem::path(dir) /
          ("krein_" + detail::hex64(model_hash) + ".bin"))
      .string();
}

namespace bin {

inline void put(std::ostream& o, const void* p, std::size_t nb) {
  o.write(static_cast<const char*>(p), static_cast<std::streamsize>(nb));
}

inline bool get(std::istream& i, void* p, std::size_t nb) {
  i.read(static_cast<char*>(p), static_cast<std::streamsize>(nb));
  return static_cast<bool>(i);
}

}  // namespace bin

// Writes eigendata and constants; projections are rebuilt on load by the
// same summation the decomposition uses, so a cache hit reproduces the
// decomposition bit for bit.
inline std::string save_decomposition(const std::string& dir,
                                      const KreinDecomposition& k) {
  std::filesystem::create_directories(dir);
  const std::uint64_t mh = k.model.hash();
  const std::string path = decomposition_path(dir, mh);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write decomposition cache '" + tmp + "'");
    bin::put(out, kMagic, 4);
    bin::put(out, &kVersion, sizeof kVersion);
    bin::put(out, &mh, sizeof mh);
    const std::int64_t n = static_cast<std::int64_t>(k.size());
    bin::put(out, &n, sizeof n);
    bin::put(out, k.lambda.data(), sizeof(double) * static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::int8_t s = static_cast<std::int8_t>(k.kappa[i]);
      bin::put(out, &s, 1);
    }
    bin::put(out, k.V.data(), sizeof(double) * static_cast<std::size_t>(n * n));
    const double scal[6] = {k.gamma_plus, k.gamma_minus, k.gamma,
                            k.beta_plus,  k.beta_minus,  k.beta_proj};
    bin::put(out, scal, sizeof scal);
    if (!out) throw Error("write to decomposition cache '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
  return path;
}

// Returns the rebuilt decomposition on a hit; nullopt on any miss
// (no file, other model, unreadable or truncated content).
inline std::optional<KreinDecomposition> try_load_decomposition(
    const std::string& dir, const DiscreteModel& model) {
  const std::uint64_t mh = model.hash();
  const std::string path = decomposition_path(dir, mh);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;

  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t stored_hash = 0;
  std::int64_t n = 0;
  if (!bin::get(in, magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    return std::nullopt;
  if (!bin::get(in, &version, sizeof version) || version != kVersion)
    return std::nullopt;
  if (!bin::get(in, &stored_hash, sizeof stored_hash) || stored_hash != mh)
    return std::nullopt;
  if (!bin::get(in, &n, sizeof n) || n != static_cast<std::int64_t>(model.size()))
    return std::nullopt;

  KreinDecomposition k;
  k.model = model;
  k.lambda.resize(n);
  if (!bin::get(in, k.lambda.data(), sizeof(double) * static_cast<std::size_t>(n)))
    return std::nullopt;
  k.kappa.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::int8_t s = 0;
    if (!bin::get(in, &s, 1)) return std::nullopt;
    k.kappa[i] = s;
  }
  k.V.resize(n, n);
  if (!bin::get(in, k.V.data(), sizeof(double) * static_cast<std::size_t>(n * n)))
    return std::nullopt;
  double scal[6];
  if (!bin::get(in, scal, sizeof scal)) return std::nullopt;
  k.gamma_plus = scal[0];
  k.gamma_minus = scal[1];
  k.gamma = scal[2];
  k.beta_plus = scal[3];
  k.beta_minus = scal[4];
  k.beta_proj = scal[5];

  for (Eigen::Index i = 0; i < n; ++i)
    (k.lambda[i] > 0 ? k.plus : k.minus).push_back(static_cast<int>(i));
  k.proj_plus = detail::family_projection(k, k.plus);
  k.proj_minus = detail::family_projection(k, k.minus);
  return k;
}

struct CachedDecomposition {
  KreinDecomposition k;
  bool hit = false;
  std::string path;  // empty when caching is disabled
};

// Decompose with an optional directory cache. An empty dir disables caching.
inline CachedDecomposition decompose_cached(const DiscreteModel& model,
                                            const std::string& dir,
                                            double zero_tol = 1e-12) {
  CachedDecomposition out;
  if (!dir.empty()) {
    if (auto k = try_load_decomposition(dir, model)) {
      out.k = std::move(*k);
      out.hit = true;
      out.path = decomposition_path(dir, model.hash());
      return out;
    }
  }
  out.k = decompose(model, zero_tol);
  if (!dir.empty()) out.path = save_decomposition(dir, out.k);
  return out;
}

}  // namespace cache
}  // namespace halfrange
