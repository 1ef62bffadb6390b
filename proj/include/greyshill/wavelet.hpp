#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "greyshill/error.hpp"

namespace greyshill {

enum class WaveletName { Haar, Db2, Db4 };

inline std::string to_string(WaveletName w) {
  switch (w) {
    case WaveletName::Haar: return "haar";
    case WaveletName::Db2: return "db2";
    case WaveletName::Db4: return "db4";
  }
  return "?";
}

// Orthonormal analysis pair. The high-pass filter is the quadrature mirror
// of the low-pass one: g[k] = (-1)^k h[L-1-k].
struct WaveletSpec {
  WaveletName name = WaveletName::Haar;
  std::vector<double> low_pass;
  std::vector<double> high_pass;

  std::size_t length() const { return low_pass.size(); }

  static WaveletSpec from_low_pass(WaveletName name, std::vector<double> h) {
    WaveletSpec w{name, std::move(h), {}};
    const std::size_t L = w.low_pass.size();
    w.high_pass.resize(L);
    for (std::size_t k = 0; k < L; ++k)
      w.high_pass[k] = (k % 2 == 0 ? 1.0 : -1.0) * w.low_pass[L - 1 - k];
    return w;
  }

  static WaveletSpec haar() {
    const double r = 1.0 / std::sqrt(2.0);
    return from_low_pass(WaveletName::Haar, {r, r});
  }

  static WaveletSpec db2() {
    const double s3 = std::sqrt(3.0);
    const double d = 4.0 * std::sqrt(2.0);
    return from_low_pass(WaveletName::Db2,
                         {(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d});
  }

  // Eight-tap Daubechies filter (four vanishing moments).
  static WaveletSpec db4() {
    return from_low_pass(WaveletName::Db4,
                         {0.23037781330885523, 0.71484657055254153, 0.63088076792959036,
                          -0.027983769416983849, -0.18703481171888114, 0.030841381835986965,
                          0.032883011666982945, -0.010597401784997278});
  }

  static WaveletSpec by_name(WaveletName name) {
    switch (name) {
      case WaveletName::Haar: return haar();
      case WaveletName::Db2: return db2();
      case WaveletName::Db4: return db4();
    }
    return haar();
  }
};

inline WaveletName parse_wavelet(std::string_view s) {
  if (s == "haar") return WaveletName::Haar;
  if (s == "db2") return WaveletName::Db2;
  if (s == "db4") return WaveletName::Db4;
  throw std::invalid_argument("unknown wavelet: " + std::string(s));
}

struct DwtLevel {
  std::vector<double> approx;
  std::vector<double> detail;
};

// One analysis step with periodic extension:
//   approx[n] = sum_m h[m] x[(2n + m) mod N],  detail[n] = sum_m g[m] x[(2n + m) mod N].
// Odd-length input is right-padded with a single zero first.
inline DwtLevel dwt_level(std::span<const double> x, const WaveletSpec& w) {
  if (x.size() < w.length())
    throw DataError("signal of length " + std::to_string(x.size()) + " is shorter than the " +
                    to_string(w.name) + " filter");
  const std::size_t n = x.size() + (x.size() % 2);
  const std::size_t half = n / 2;
  auto at = [&](std::size_t k) { return k % n < x.size() ? x[k % n] : 0.0; };
  DwtLevel out{std::vector<double>(half, 0.0), std::vector<double>(half, 0.0)};
  for (std::size_t j = 0; j < half; ++j) {
    double a = 0, d = 0;
    for (std::size_t m = 0; m < w.length(); ++m) {
      const double v = at(2 * j + m);
      a += w.low_pass[m] * v;
      d += w.high_pass[m] * v;
    }
    out.approx[j] = a;
    out.detail[j] = d;
  }
  return out;
}

// Synthesis step inverting dwt_level under the same periodic extension.
// Returns 2 * |approx| samples; callers drop the padding sample for odd input.
inline std::vector<double> idwt_level(std::span<const double> approx, std::span<const double> detail,
                                      const WaveletSpec& w) {
  if (approx.size() != detail.size()) throw DataError("approximation/detail length mismatch");
  const std::size_t n = 2 * approx.size();
  std::vector<double> x(n, 0.0);
  if (n == 0) return x;
  for (std::size_t j = 0; j < approx.size(); ++j)
    for (std::size_t m = 0; m < w.length(); ++m)
      x[(2 * j + m) % n] += w.low_pass[m] * approx[j] + w.high_pass[m] * detail[j];
  return x;
}

struct DwtResult {
  std::vector<std::vector<double>> approx;  // A^1 .. A^K
  std::vector<std::vector<double>> detail;  // D^1 .. D^K
  std::size_t original_length = 0;

  std::size_t levels() const { return approx.size(); }
  const std::vector<double>& final_approx() const { return approx.back(); }
};

// Recurses on the approximation branch only.
inline DwtResult dwt_multilevel(std::span<const double> x, const WaveletSpec& w, std::size_t levels) {
  if (levels < 1) throw DataError("wavelet level count must be at least 1");
  DwtResult r;
  r.original_length = x.size();
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t k = 1; k <= levels; ++k) {
    if (current.size() < w.length())
      throw DataError("level " + std::to_string(k) + " is too deep for a signal of length " +
                      std::to_string(x.size()));
    auto lvl = dwt_level(current, w);
    current = lvl.approx;
    r.approx.push_back(std::move(lvl.approx));
    r.detail.push_back(std::move(lvl.detail));
  }
  return r;
}

}  // namespace greyshill
