#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "heavytail/random.hpp"

namespace ht {

enum class EntryVariant { pareto_phase, stable_modulus };
enum class PhaseKind { circle, sign };

std::string to_string(EntryVariant v);
std::string to_string(PhaseKind p);
EntryVariant parse_entry_variant(const std::string& s);
PhaseKind parse_phase_kind(const std::string& s);

// Entry distribution in the domain of attraction of an alpha-stable law:
// pareto_phase draws phase * W^{-1/alpha}; stable_modulus draws
// phase * |Z| with Z real symmetric alpha-stable, E exp(i t Z) = exp(-|t|^alpha).
class HeavyTailLaw {
 public:
  HeavyTailLaw(double alpha, EntryVariant variant = EntryVariant::pareto_phase, PhaseKind phase = PhaseKind::circle);

  double alpha() const noexcept { return alpha_; }
  EntryVariant variant() const noexcept { return variant_; }
  PhaseKind phase() const noexcept { return phase_; }

  // c in P(|X| >= t) ~ c t^{-alpha}.
  double tail_constant() const noexcept { return tail_constant_; }
  // P(|X| >= t), exact for pareto_phase, numerical quadrature for stable_modulus.
  double survival(double t) const;
  // E[|X|^p 1{|X| <= t}] for pareto_phase, closed form; p > alpha.
  double truncated_moment(double p, double t) const;

  double sample_modulus(RandomStream& rng) const;
  std::complex<double> sample_phase(RandomStream& rng) const;
  std::complex<double> sample(RandomStream& rng) const { return sample_modulus(rng) * sample_phase(rng); }

 private:
  double alpha_;
  EntryVariant variant_;
  PhaseKind phase_;
  double tail_constant_;
};

// inf{a > 0 : n P(|X| >= a) <= 1}.
double scaling_a_n(const HeavyTailLaw& law, std::size_t n);

inline constexpr std::size_t kDefaultMatrixCap = 4096;

struct MatrixSample {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  EntryVariant variant = EntryVariant::pareto_phase;
  PhaseKind phase = PhaseKind::circle;
  double scale = 1.0;  // a_n
  Eigen::MatrixXcd entries;
};

// A_ij = X_ij / a_n with row i drawn from substream i of `seed`.
MatrixSample build_matrix(const HeavyTailLaw& law, std::size_t n, std::uint64_t seed,
                          std::size_t cap = kDefaultMatrixCap, unsigned workers = 1);

void write_matrix_binary(const MatrixSample& m, const std::filesystem::path& path);
MatrixSample read_matrix_binary(const std::filesystem::path& path);
void write_matrix_csv(const MatrixSample& m, const std::filesystem::path& path);

}  // namespace ht
