/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "vqebench/error.hpp"

namespace vqebench {

/// Counter-based random stream.
///
/// Output k (k = 1, 2, ...) is the SplitMix64 finalizer applied to
/// `key + k * 0x9E3779B97F4A7C15` (mod 2^64). The stream is therefore a pure
/// function of (key, counter), which makes results reproducible on every
/// platform and independent of how jobs are scheduled. All derived draws
/// (uniform reals, bounded integers, Gaussians) are computed here with fixed
/// formulas rather than through <random> distributions, whose algorithms are
/// implementation-defined.
class RandomStream {
public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept {
    double v = lo + (hi - lo) * uniform01();
    return v < hi ? v : std::nextafter(hi, lo);
  }

  /// Uniform integer on [0, bound), bound > 0. Rejection sampling keeps the
  /// result exactly unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = (*this)();
      if (r >= threshold)
        return r % bound;
    }
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SHA-256 digest of a byte string.
inline std::array<unsigned char, 32> sha256(std::string_view bytes) {
  std::array<unsigned char, 32> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != digest.size())
    detail::fail(ErrorCode::IoError, "SHA-256 digest failed");
  return digest;
}

inline std::string sha256_hex(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : sha256(bytes)) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

/// Stream key for (master_seed, label): the first 8 bytes, read little-endian,
/// of SHA-256 over the 8 little-endian bytes of master_seed followed by the
/// label bytes.
inline std::uint64_t derive_key(std::uint64_t master_seed,
                                std::string_view label) {
  std::string message(8, '\0');
  for (int b = 0; b < 8; ++b)
    message[b] = static_cast<char>((master_seed >> (8 * b)) & 0xFF);
  message.append(label);
  const auto digest = sha256(message);
  std::uint64_t key = 0;
  for (int b = 7; b >= 0; --b)
    key = (key << 8) | digest[b];
  return key;
}

inline RandomStream derive_stream(std::uint64_t master_seed,
                                  std::string_view label) {
  return RandomStream(derive_key(master_seed, label));
}

/// Canonical label "size=<>/instance=<>/run=<>/alg=<>/purpose=<>".
inline std::string stream_label(int size, int instance, int run,
                                std::string_view alg,
                                std::string_view purpose) {
  std::string s = "size=" + std::to_string(size) +
                  "/instance=" + std::to_string(instance) +
                  "/run=" + std::to_string(run) + "/alg=";
  s.append(alg);
  s += "/purpose=";
  s.append(purpose);
  return s;
}

} // namespace vqebench
