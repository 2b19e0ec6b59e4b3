#include "tcsim/tomography.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "tcsim/parallel.hpp"

namespace tcsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LabelInfo {
  ProjectorLabel label;
  std::string_view text;
};

constexpr LabelInfo kLabels[] = {
    {ProjectorLabel::kZ0, "z0"},     {ProjectorLabel::kZ1, "z1"},
    {ProjectorLabel::kXPlus, "x+"},  {ProjectorLabel::kYPlus, "y+"},
    {ProjectorLabel::kXMinus, "x-"}, {ProjectorLabel::kYMinus, "y-"},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument(fmt::format("count record: bad {} '{}'", what, text));
  }
  return value;
}

void check_counts(std::span<const ProjectorSetting> settings, std::span<const double> counts,
                  double flux) {
  if (settings.empty()) throw std::invalid_argument("tomography: empty setting list");
  if (settings.size() != counts.size()) {
    throw std::invalid_argument("tomography: counts and settings differ in length");
  }
  if (!(flux > 0.0)) throw std::invalid_argument("tomography: flux must be positive");
  const std::size_t n = settings.front().num_qubits();
  for (const auto& s : settings) {
    if (s.num_qubits() != n || n == 0) {
      throw std::invalid_argument("tomography: settings disagree on qubit count");
    }
  }
  for (double c : counts) {
    if (!(c >= 0.0)) throw std::invalid_argument("tomography: negative count");
  }
}

// Rows are conj(vec(Pi_s)) so that probabilities are Re(A vec(rho)) and the
// operator sum_s w_s Pi_s is A^H w.
class MeasurementModel {
 public:
  MeasurementModel(std::span<const ProjectorSetting> settings, std::span<const double> counts,
                   double flux)
      : counts_(counts.begin(), counts.end()), flux_(flux) {
    dim_ = Eigen::Index{1} << settings.front().num_qubits();
    rows_.resize(static_cast<Eigen::Index>(settings.size()), dim_ * dim_);
    for (std::size_t s = 0; s < settings.size(); ++s) {
      const ComplexMatrix pi = settings[s].projector();
      rows_.row(static_cast<Eigen::Index>(s)) =
          Eigen::Map<const ComplexVector>(pi.data(), dim_ * dim_).conjugate().transpose();
    }
    for (double c : counts_) {
      total_ += c;
      if (c > 0.0) constant_ += c * std::log(c);
    }
    constant_ -= total_;
  }

  Eigen::Index dim() const { return dim_; }
  double total_counts() const { return total_; }

  RealVector probabilities(const ComplexMatrix& rho) const {
    return (rows_ * Eigen::Map<const ComplexVector>(rho.data(), dim_ * dim_)).real();
  }

  // Log-likelihood minus sum_s (n_s log n_s - n_s); same maximizer, but stays
  // O(#settings) in magnitude so differences keep their precision.
  double reduced_objective(const RealVector& p) const {
    double obj = 0.0;
    for (Eigen::Index s = 0; s < p.size(); ++s) {
      const double n = counts_[static_cast<std::size_t>(s)];
      const double mean = flux_ * std::max(p(s), 0.0);
      if (n > 0.0) {
        if (mean <= 0.0) return kNegInf;
        obj += n * std::log(mean / n);
      }
      obj -= mean - n;
    }
    return obj;
  }

  double full_objective(double reduced) const { return reduced + constant_; }

  ComplexMatrix gradient(const RealVector& p) const {
    ComplexVector w(p.size());
    for (Eigen::Index s = 0; s < p.size(); ++s) {
      const double n = counts_[static_cast<std::size_t>(s)];
      w(s) = (n > 0.0 ? n / p(s) : 0.0) - flux_;
    }
    const ComplexVector g = rows_.adjoint() * w;
    ComplexMatrix out = Eigen::Map<const ComplexMatrix>(g.data(), dim_, dim_);
    return 0.5 * (out + out.adjoint());
  }

 private:
  std::vector<double> counts_;
  double flux_;
  Eigen::Index dim_ = 0;
  ComplexMatrix rows_;
  double total_ = 0.0;
  double constant_ = 0.0;
};

RealVector project_to_simplex(const RealVector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) shift = candidate;
  }
  return (v.array() - shift).cwiseMax(0.0);
}

double inner_real(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.array().conjugate() * b.array()).sum().real();
}

// Pauli string matrices for n qubits, index digits base 4 (qubit 0 most
// significant), digit 0 = I, 1 = X, 2 = Y, 3 = Z.
std::vector<ComplexMatrix> pauli_basis(std::size_t n) {
  const ComplexMatrix single[4] = {pauli::identity(), pauli::x(), pauli::y(), pauli::z()};
  std::vector<ComplexMatrix> out;
  const std::size_t count = std::size_t{1} << (2 * n);
  out.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    ComplexMatrix m = ComplexMatrix::Identity(1, 1);
    for (std::size_t q = 0; q < n; ++q) {
      m = tensor(m, single[(code >> (2 * (n - 1 - q))) & 3]);
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Settings and records

std::string_view to_string(ProjectorLabel label) {
  for (const auto& info : kLabels) {
    if (info.label == label) return info.text;
  }
  return "??";
}

PureState projector_state(ProjectorLabel label) {
  const double h = 1.0 / std::numbers::sqrt2;
  const Complex i{0.0, 1.0};
  ComplexVector v(2);
  switch (label) {
    case ProjectorLabel::kZ0: v << 1.0, 0.0; break;
    case ProjectorLabel::kZ1: v << 0.0, 1.0; break;
    case ProjectorLabel::kXPlus: v << h, h; break;
    case ProjectorLabel::kYPlus: v << h, h * i; break;
    case ProjectorLabel::kXMinus: v << h, -h; break;
    case ProjectorLabel::kYMinus: v << h, -h * i; break;
  }
  return PureState::normalized(std::move(v));
}

std::string ProjectorSetting::label() const {
  std::string out;
  for (auto l : per_qubit) out += to_string(l);
  return out;
}

ProjectorSetting ProjectorSetting::parse(std::string_view label) {
  label = trim(label);
  if (label.empty() || label.size() % 2 != 0) {
    throw std::invalid_argument(fmt::format("setting label '{}' is malformed", label));
  }
  ProjectorSetting out;
  for (std::size_t k = 0; k < label.size(); k += 2) {
    const std::string_view piece = label.substr(k, 2);
    const auto it = std::find_if(std::begin(kLabels), std::end(kLabels),
                                 [&](const LabelInfo& info) { return info.text == piece; });
    if (it == std::end(kLabels)) {
      throw std::invalid_argument(fmt::format("unknown projector label '{}'", piece));
    }
    out.per_qubit.push_back(it->label);
  }
  return out;
}

ComplexMatrix ProjectorSetting::projector() const {
  ComplexMatrix m = ComplexMatrix::Identity(1, 1);
  for (auto l : per_qubit) m = tensor(m, projector_state(l).projector());
  return m;
}

std::vector<ProjectorSetting> standard_settings(std::size_t n, SettingsFamily family) {
  if (n == 0) throw std::invalid_argument("standard_settings: need at least one qubit");
  const std::vector<ProjectorLabel> alphabet =
      family == SettingsFamily::kMinimal
          ? std::vector{ProjectorLabel::kZ0, ProjectorLabel::kZ1, ProjectorLabel::kXPlus,
                        ProjectorLabel::kYPlus}
          : std::vector{ProjectorLabel::kZ0, ProjectorLabel::kZ1, ProjectorLabel::kXPlus,
                        ProjectorLabel::kXMinus, ProjectorLabel::kYPlus, ProjectorLabel::kYMinus};
  std::size_t total = 1;
  for (std::size_t q = 0; q < n; ++q) total *= alphabet.size();

  std::vector<ProjectorSetting> out;
  out.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    ProjectorSetting s;
    s.per_qubit.resize(n);
    std::size_t rest = code;
    for (std::size_t q = n; q-- > 0;) {
      s.per_qubit[q] = alphabet[rest % alphabet.size()];
      rest /= alphabet.size();
    }
    out.push_back(std::move(s));
  }
  return out;
}

void CountRecord::validate() const {
  check_counts(settings, counts_as_double(), flux);
}

std::vector<double> CountRecord::counts_as_double() const {
  return {counts.begin(), counts.end()};
}

std::string CountRecord::to_text() const {
  validate();
  std::string out = fmt::format("# flux: {}\n# seed: {}\nsetting_label,count\n", flux, seed);
  for (std::size_t s = 0; s < settings.size(); ++s) {
    out += fmt::format("{},{}\n", settings[s].label(), counts[s]);
  }
  return out;
}

CountRecord CountRecord::from_text(std::string_view text) {
  CountRecord rec;
  bool have_flux = false;
  bool have_header = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (row.front() == '#') {
      const std::string_view body = trim(row.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const std::string_view key = trim(body.substr(0, colon));
      const std::string_view value = body.substr(colon + 1);
      if (key == "flux") {
        rec.flux = parse_number<double>(value, "flux");
        have_flux = true;
      } else if (key == "seed") {
        rec.seed = parse_number<std::uint64_t>(value, "seed");
      }
      continue;
    }
    if (!have_header) {
      if (row != "setting_label,count") {
        throw std::invalid_argument(fmt::format("count record: unexpected header '{}'", row));
      }
      have_header = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos) {
      throw std::invalid_argument(fmt::format("count record: malformed row '{}'", row));
    }
    rec.settings.push_back(ProjectorSetting::parse(row.substr(0, comma)));
    rec.counts.push_back(parse_number<std::uint64_t>(row.substr(comma + 1), "count"));
  }
  if (!have_flux) throw std::invalid_argument("count record: missing flux header");
  rec.validate();
  return rec;
}

std::vector<double> expected_counts(const DensityMatrix& rho,
                                    std::span<const ProjectorSetting> settings, double flux) {
  std::vector<double> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    if (s.num_qubits() != rho.num_qubits()) {
      throw std::invalid_argument("expected_counts: setting does not match state size");
    }
    const double p = (rho.matrix() * s.projector()).trace().real();
    out.push_back(flux * std::max(p, 0.0));
  }
  return out;
}

CountRecord simulate_counts(const DensityMatrix& rho, std::vector<ProjectorSetting> settings,
                            double flux, std::uint64_t seed) {
  if (!(flux > 0.0)) throw std::invalid_argument("simulate_counts: flux must be positive");
  const std::vector<double> means = expected_counts(rho, settings, flux);
  std::mt19937_64 rng(seed);
  CountRecord rec{std::move(settings), {}, flux, seed};
  rec.counts.reserve(means.size());
  for (double mean : means) {
    if (mean <= 0.0) {
      rec.counts.push_back(0);
      continue;
    }
    std::poisson_distribution<std::uint64_t> draw(mean);
    rec.counts.push_back(draw(rng));
  }
  return rec;
}

double log_likelihood(const ComplexMatrix& rho, std::span<const ProjectorSetting> settings,
                      std::span<const double> counts, double flux) {
  check_counts(settings, counts, flux);
  const MeasurementModel model(settings, counts, flux);
  if (rho.rows() != model.dim()) {
    throw std::invalid_argument("log_likelihood: state does not match settings");
  }
  return model.full_objective(model.reduced_objective(model.probabilities(rho)));
}

std::string_view to_string(ReconstructionMethod method) {
  return method == ReconstructionMethod::kLinear ? "LINEAR" : "MLE";
}

ComplexMatrix project_to_density_matrix(const ComplexMatrix& m) {
  const ComplexMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm);
  const RealVector lambda = project_to_simplex(solver.eigenvalues());
  const ComplexMatrix& v = solver.eigenvectors();
  ComplexMatrix out = v * lambda.cast<Complex>().asDiagonal() * v.adjoint();
  return 0.5 * (out + out.adjoint());
}

// ---------------------------------------------------------------------------
// Linear inversion

ReconstructionResult linear_inversion(std::span<const ProjectorSetting> settings,
                                      std::span<const double> counts, double flux) {
  check_counts(settings, counts, flux);
  const std::size_t n = settings.front().num_qubits();
  const auto dim = Eigen::Index{1} << n;

  double total = 0.0;
  for (double c : counts) total += c;
  if (total == 0.0) {
    DensityMatrix mixed = DensityMatrix::maximally_mixed(n);
    const double ll = log_likelihood(mixed.matrix(), settings, counts, flux);
    return {mixed, ReconstructionMethod::kLinear, ll, 0, true, mixed.matrix()};
  }

  // rho = (I + sum_{P != I} c_P P) / d; solve for the real coefficients c_P
  const std::vector<ComplexMatrix> basis = pauli_basis(n);
  const auto n_settings = static_cast<Eigen::Index>(settings.size());
  const auto n_unknowns = static_cast<Eigen::Index>(basis.size() - 1);
  const double scale = flux / static_cast<double>(dim);
  Eigen::MatrixXd a(n_settings, n_unknowns);
  Eigen::VectorXd b(n_settings);
  for (Eigen::Index s = 0; s < n_settings; ++s) {
    const ComplexMatrix pi = settings[static_cast<std::size_t>(s)].projector();
    b(s) = counts[static_cast<std::size_t>(s)] - scale * pi.trace().real();
    for (Eigen::Index k = 0; k < n_unknowns; ++k) {
      a(s, k) = scale * (basis[static_cast<std::size_t>(k + 1)] * pi).trace().real();
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < n_unknowns) {
    throw ReconstructionError(fmt::format(
        "linear_inversion: settings span rank {} of {} needed", qr.rank(), n_unknowns));
  }
  const Eigen::VectorXd coeffs = qr.solve(b);

  ComplexMatrix raw = ComplexMatrix::Identity(dim, dim);
  for (Eigen::Index k = 0; k < n_unknowns; ++k) {
    raw += coeffs(k) * basis[static_cast<std::size_t>(k + 1)];
  }
  raw /= static_cast<double>(dim);

  DensityMatrix rho(project_to_density_matrix(raw));
  const double ll = log_likelihood(rho.matrix(), settings, counts, flux);
  return {std::move(rho), ReconstructionMethod::kLinear, ll, 0, true, std::move(raw)};
}

ReconstructionResult linear_inversion(const CountRecord& rec) {
  rec.validate();
  const auto counts = rec.counts_as_double();
  return linear_inversion(rec.settings, counts, rec.flux);
}

// ---------------------------------------------------------------------------
// Maximum likelihood

ReconstructionResult mle_reconstruct(std::span<const ProjectorSetting> settings,
                                     std::span<const double> counts, double flux,
                                     const MleOptions& options) {
  check_counts(settings, counts, flux);
  if (options.max_iter < 1) throw std::invalid_argument("mle_reconstruct: max_iter must be >= 1");

  const MeasurementModel model(settings, counts, flux);
  const Eigen::Index dim = model.dim();
  const std::size_t n = settings.front().num_qubits();

  if (model.total_counts() == 0.0) {
    DensityMatrix mixed = DensityMatrix::maximally_mixed(n);
    const double ll = model.full_objective(model.reduced_objective(model.probabilities(mixed.matrix())));
    return {mixed, ReconstructionMethod::kMaximumLikelihood, ll, 0, true, std::nullopt};
  }

  // warm start: clipped linear inversion, mixed toward I/d only if needed to
  // make the likelihood finite
  const ComplexMatrix mixed = ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim);
  ComplexMatrix x = linear_inversion(settings, counts, flux).rho.matrix();
  double fx = model.reduced_objective(model.probabilities(x));
  for (double eps = 1e-4; !std::isfinite(fx); eps *= 4.0) {
    const double w = std::min(eps, 1.0);
    x = (1.0 - w) * x + w * mixed;
    fx = model.reduced_objective(model.probabilities(x));
    if (w == 1.0 && !std::isfinite(fx)) {
      throw ReconstructionError("mle_reconstruct: no feasible starting point");
    }
  }

  // accelerated projected gradient with monotone safeguard
  ComplexMatrix y = x;
  double fy = fx;
  double theta = 1.0;
  double step = 1.0 / std::max(1.0, model.total_counts() * static_cast<double>(dim));
  bool converged = false;
  int iter = 0;
  while (iter < options.max_iter) {
    ++iter;
    const RealVector py = model.probabilities(y);
    const ComplexMatrix grad = model.gradient(py);

    ComplexMatrix z;
    double fz = kNegInf;
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings) {
      z = project_to_density_matrix(y + step * grad);
      fz = model.reduced_objective(model.probabilities(z));
      const ComplexMatrix delta = z - y;
      const double bound = fy + inner_real(grad, delta) - delta.squaredNorm() / (2.0 * step);
      if (std::isfinite(fz) && fz >= bound) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    const bool from_extrapolation = (y - x).squaredNorm() > 0.0;
    if (!accepted || fz < fx) {
      if (from_extrapolation) {
        // momentum overshot; restart from the last accepted iterate
        y = x;
        fy = fx;
        theta = 1.0;
        continue;
      }
      converged = true;  // no ascent available from x itself
      break;
    }

    const double gain = fz - fx;
    const ComplexMatrix previous = x;
    x = z;
    fx = fz;
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    y = project_to_density_matrix(x + ((theta - 1.0) / theta_next) * (x - previous));
    fy = model.reduced_objective(model.probabilities(y));
    theta = theta_next;
    if (!std::isfinite(fy)) {
      y = x;
      fy = fx;
      theta = 1.0;
    }
    step *= 2.0;
    if (gain < options.tol) {
      converged = true;
      break;
    }
  }

  DensityMatrix rho(x);
  return {std::move(rho), ReconstructionMethod::kMaximumLikelihood, model.full_objective(fx), iter,
          converged, std::nullopt};
}

ReconstructionResult mle_reconstruct(const CountRecord& rec, const MleOptions& options) {
  rec.validate();
  const auto counts = rec.counts_as_double();
  return mle_reconstruct(rec.settings, counts, rec.flux, options);
}

// ---------------------------------------------------------------------------
// Monte Carlo error propagation

std::vector<MonteCarloEstimate> monte_carlo_statistics(const CountRecord& rec,
                                                       std::span<const StateStatistic> statistics,
                                                       int n_samples, std::uint64_t seed,
                                                       const MleOptions& options) {
  if (n_samples < 2) throw std::invalid_argument("monte_carlo_statistic: need at least 2 samples");
  rec.validate();
  const std::size_t n_stats = statistics.size();
  const auto samples = static_cast<std::size_t>(n_samples);
  std::vector<double> values(samples * n_stats);

  parallel_for(samples, [&](std::size_t i) {
    std::mt19937_64 rng(seed + i);
    std::vector<double> resampled;
    resampled.reserve(rec.counts.size());
    for (std::uint64_t c : rec.counts) {
      if (c == 0) {
        resampled.push_back(0.0);
        continue;
      }
      std::poisson_distribution<std::uint64_t> draw(static_cast<double>(c));
      resampled.push_back(static_cast<double>(draw(rng)));
    }
    try {
      const ReconstructionResult r = mle_reconstruct(rec.settings, resampled, rec.flux, options);
      for (std::size_t k = 0; k < n_stats; ++k) values[i * n_stats + k] = statistics[k](r.rho);
    } catch (const std::exception& e) {
      throw ReconstructionError(fmt::format("Monte Carlo sample {}: {}", i, e.what()));
    }
  });

  std::vector<MonteCarloEstimate> out;
  out.reserve(n_stats);
  for (std::size_t k = 0; k < n_stats; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < samples; ++i) sum += values[i * n_stats + k];
    const double mean = sum / static_cast<double>(samples);
    double ss = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double d = values[i * n_stats + k] - mean;
      ss += d * d;
    }
    out.push_back({mean, std::sqrt(ss / static_cast<double>(samples - 1))});
  }
  return out;
}

MonteCarloEstimate monte_carlo_statistic(const CountRecord& rec, const StateStatistic& statistic,
                                         int n_samples, std::uint64_t seed,
                                         const MleOptions& options) {
  const StateStatistic stats[] = {statistic};
  return monte_carlo_statistics(rec, stats, n_samples, seed, options).front();
}

}  // namespace tcsim
