#pragma once

#include <cstdint>
#include <cstring>
#include <string>

#include <Eigen/Core>

namespace halfrange::detail {

// FNV-1a over raw bytes; used to key caches and to stamp CSV artifacts.
struct Fnv1a {
  std::uint64_t state = 1469598103934665603ull;

  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state ^= p[i];
      state *= 1099511628211ull;
    }
  }
  void f64(double v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void vec(const Eigen::VectorXd& v) {
    i64(v.size());
    if (v.size()) bytes(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  void mat(const Eigen::MatrixXd& m) {
    i64(m.rows());
    i64(m.cols());
    if (m.size()) bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
};

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace halfrange::detail
