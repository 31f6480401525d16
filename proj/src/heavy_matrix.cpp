#include "heavytail/heavy_matrix.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/quadrature.hpp"

static_assert(std::endian::native == std::endian::little, "matrix dump format assumes a little-endian host");

namespace ht {

namespace {
constexpr double kSurvivalSeriesStart = 30.0;  // t^alpha above which the tail series is used
}  // namespace

std::string to_string(EntryVariant v) { return v == EntryVariant::pareto_phase ? "pareto_phase" : "stable_modulus"; }
std::string to_string(PhaseKind p) { return p == PhaseKind::circle ? "circle" : "sign"; }

EntryVariant parse_entry_variant(const std::string& s) {
  if (s == "pareto_phase") return EntryVariant::pareto_phase;
  if (s == "stable_modulus") return EntryVariant::stable_modulus;
  throw std::invalid_argument("unknown entry variant '" + s + "'");
}

PhaseKind parse_phase_kind(const std::string& s) {
  if (s == "circle") return PhaseKind::circle;
  if (s == "sign") return PhaseKind::sign;
  throw std::invalid_argument("unknown phase kind '" + s + "'");
}

HeavyTailLaw::HeavyTailLaw(double alpha, EntryVariant variant, PhaseKind phase)
    : alpha_(alpha), variant_(variant), phase_(phase) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("HeavyTailLaw: alpha must lie in (0, 2)");
  if (variant_ == EntryVariant::pareto_phase) {
    tail_constant_ = 1.0;
  } else {
    tail_constant_ = 2.0 / std::numbers::pi * std::tgamma(alpha_) * std::sin(std::numbers::pi * alpha_ / 2.0);
  }
}

double HeavyTailLaw::survival(double t) const {
  if (t <= 0.0) return 1.0;
  if (variant_ == EntryVariant::pareto_phase) return t <= 1.0 ? 1.0 : std::pow(t, -alpha_);

  const double a = alpha_;
  if (a == 1.0) return 1.0 - 2.0 / std::numbers::pi * std::atan(t);
  if (std::pow(t, a) >= kSurvivalSeriesStart) {
    // (2/pi) sum_k (-1)^{k+1} Gamma(k alpha)/k! sin(k pi alpha/2) t^{-k alpha}; asymptotic for alpha > 1,
    // so stop at the smallest term. The integral below loses its narrow peak at large t.
    double sum = 0.0, last = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 40; ++k) {
      const double magnitude = std::exp(std::lgamma(k * a) - std::lgamma(k + 1.0) - k * a * std::log(t));
      if (magnitude > last) break;
      const double term = magnitude * std::sin(k * std::numbers::pi * a / 2.0);
      sum += (k % 2 == 1 ? term : -term);
      last = magnitude;
      if (last < 1e-17 * std::abs(sum)) break;
    }
    return 2.0 / std::numbers::pi * sum;
  }
  // Zolotarev's integral for the symmetric law, theta in (0, pi/2).
  const double expo = a / (a - 1.0);
  const double scale = std::pow(t, expo);
  auto v = [a, expo](double th) {
    return std::pow(std::cos(th) / std::sin(a * th), expo) * std::cos((a - 1.0) * th) / std::cos(th);
  };
  const double half_pi = std::numbers::pi / 2.0;
  if (a > 1.0) {
    auto f = [&](double th) { return std::exp(-scale * v(th)); };
    return 2.0 / std::numbers::pi * integrate(f, 0.0, half_pi, 1e-12, 12).value;
  }
  auto f = [&](double th) { return -std::expm1(-scale * v(th)); };
  return 2.0 / std::numbers::pi * integrate(f, 0.0, half_pi, 1e-12, 12).value;
}

double HeavyTailLaw::truncated_moment(double p, double t) const {
  if (variant_ != EntryVariant::pareto_phase) {
    throw std::invalid_argument("truncated_moment: closed form only for pareto_phase");
  }
  if (!(p > alpha_)) throw std::invalid_argument("truncated_moment: need p > alpha");
  if (t <= 1.0) return 0.0;
  return alpha_ * (std::pow(t, p - alpha_) - 1.0) / (p - alpha_);
}

double HeavyTailLaw::sample_modulus(RandomStream& rng) const {
  if (variant_ == EntryVariant::pareto_phase) return std::pow(rng.uniform(), -1.0 / alpha_);
  // Chambers-Mallows-Stuck, symmetric case.
  const double a = alpha_;
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  if (a == 1.0) return std::abs(std::tan(v));
  const double x = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
                   std::pow(std::cos((1.0 - a) * v) / w, (1.0 - a) / a);
  return std::abs(x);
}

std::complex<double> HeavyTailLaw::sample_phase(RandomStream& rng) const {
  if (phase_ == PhaseKind::sign) return rng.bernoulli_half() ? 1.0 : -1.0;
  return std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
}

double scaling_a_n(const HeavyTailLaw& law, std::size_t n) {
  if (n < 1) throw std::invalid_argument("scaling_a_n: n must be at least 1");
  const double nn = static_cast<double>(n);
  if (law.variant() == EntryVariant::pareto_phase) {
    double a = std::pow(nn, 1.0 / law.alpha());
    while (nn * law.survival(a) > 1.0) a = std::nextafter(a, std::numeric_limits<double>::infinity());
    return a;
  }
  if (n < 2) throw std::invalid_argument("scaling_a_n: stable_modulus scale is degenerate at n = 1");
  const double target = 1.0 / nn;
  double lo = 0.0, hi = std::pow(law.tail_constant() * nn, 1.0 / law.alpha());
  while (law.survival(hi) > target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (law.survival(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

MatrixSample build_matrix(const HeavyTailLaw& law, std::size_t n, std::uint64_t seed, std::size_t cap,
                          unsigned workers) {
  if (n < 1) throw std::invalid_argument("build_matrix: n must be at least 1");
  if (n > cap) throw ResourceLimit("build_matrix: n=" + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  MatrixSample m;
  m.n = n;
  m.seed = seed;
  m.alpha = law.alpha();
  m.variant = law.variant();
  m.phase = law.phase();
  m.scale = scaling_a_n(law, n);
  m.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double inv = 1.0 / m.scale;
  parallel_for(n, workers, [&](std::size_t i) {
    RandomStream rng(substream_seed(seed, i));
    for (std::size_t j = 0; j < n; ++j) {
      m.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = law.sample(rng) * inv;
    }
  });
  return m;
}

namespace {

constexpr char kMagic[4] = {'H', 'T', 'M', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint32_t variant_tag(EntryVariant v, PhaseKind p) {
  return (v == EntryVariant::pareto_phase ? 0u : 2u) + (p == PhaseKind::circle ? 0u : 1u);
}

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("matrix dump: truncated header");
  return v;
}

}  // namespace

void write_matrix_binary(const MatrixSample& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint64_t>(m.n));
  put(out, m.alpha);
  put(out, variant_tag(m.variant, m.phase));
  put(out, m.seed);
  // Column-major, each entry as (re, im).
  out.write(reinterpret_cast<const char*>(m.entries.data()),
            static_cast<std::streamsize>(m.entries.size() * sizeof(std::complex<double>)));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

MatrixSample read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("matrix dump: bad magic");
  if (get<std::uint32_t>(in) != kFormatVersion) throw std::runtime_error("matrix dump: unsupported version");
  MatrixSample m;
  m.n = static_cast<std::size_t>(get<std::uint64_t>(in));
  m.alpha = get<double>(in);
  const auto tag = get<std::uint32_t>(in);
  if (tag > 3) throw std::runtime_error("matrix dump: bad variant tag");
  m.variant = tag < 2 ? EntryVariant::pareto_phase : EntryVariant::stable_modulus;
  m.phase = tag % 2 == 0 ? PhaseKind::circle : PhaseKind::sign;
  m.seed = get<std::uint64_t>(in);
  m.scale = scaling_a_n(HeavyTailLaw(m.alpha, m.variant, m.phase), m.n);
  m.entries.resize(static_cast<Eigen::Index>(m.n), static_cast<Eigen::Index>(m.n));
  in.read(reinterpret_cast<char*>(m.entries.data()),
          static_cast<std::streamsize>(m.entries.size() * sizeof(std::complex<double>)));
  if (!in) throw std::runtime_error("matrix dump: truncated payload");
  return m;
}

void write_matrix_csv(const MatrixSample& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "row,col,re,im\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j) {
      const auto v = m.entries(i, j);
      out << i << ',' << j << ',' << v.real() << ',' << v.imag() << '\n';
    }
  }
}

}  // namespace ht
