#include "locgap/bose.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace locgap {

namespace {

constexpr double kPi = std::numbers::pi;
const double kLhyCoeff = 128.0 / (15.0 * std::sqrt(kPi));
constexpr double kPCut = 8.0;  // integrand tail beyond is < 1e-26 of the result

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (positive half).
constexpr double kKNodes[8] = {0.000000000000000, 0.207784955007898, 0.405845151377397,
                               0.586087235467691, 0.741531185599394, 0.864864423359769,
                               0.949107912342759, 0.991455371120813};
constexpr double kKWeights[8] = {0.209482141084728, 0.204432940075298, 0.190350578064785,
                                 0.169004726639267, 0.140653259715525, 0.104790010322250,
                                 0.063092092629979, 0.022935322010529};
constexpr double kGWeights[4] = {0.417959183673469, 0.381830050505119, 0.279705391489277,
                                 0.129484966168870};

struct Panel {
  double a, b, value, error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double h = (b - a) / 2.0, mid = (a + b) / 2.0;
  double fk[8][2];
  for (int i = 0; i < 8; ++i) {
    fk[i][0] = f(mid - h * kKNodes[i]);
    fk[i][1] = (i == 0) ? fk[i][0] : f(mid + h * kKNodes[i]);
  }
  double k15 = kKWeights[0] * fk[0][0];
  for (int i = 1; i < 8; ++i) k15 += kKWeights[i] * (fk[i][0] + fk[i][1]);
  double g7 = kGWeights[0] * fk[0][0];
  for (int j = 1; j < 4; ++j) g7 += kGWeights[j] * (fk[2 * j][0] + fk[2 * j][1]);
  return {a, b, k15 * h, std::abs(k15 - g7) * h};
}

double adaptive_gk(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  std::vector<Panel> work{gk15(f, a, b)};
  double total = work[0].value;
  for (int round = 0; round < 60; ++round) {
    double err = 0.0;
    for (const auto& p : work) err += p.error;
    double tol = rel_tol * std::max(std::abs(total), 1e-300) + 1e-300;
    if (err <= tol || work.size() > 4000) break;
    // Split the worst panel.
    size_t worst = 0;
    std::vector<Panel> next;
    next.reserve(work.size() + 1);
    for (size_t i = 1; i < work.size(); ++i)
      if (work[i].error > work[worst].error) worst = i;
    for (size_t i = 0; i < work.size(); ++i) {
      if (i == worst) {
        double mid = (work[i].a + work[i].b) / 2.0;
        next.push_back(gk15(f, work[i].a, mid));
        next.push_back(gk15(f, mid, work[i].b));
      } else {
        next.push_back(work[i]);
      }
    }
    work = std::move(next);
    total = 0.0;
    for (const auto& p : work) total += p.value;
  }
  return total;
}

double tanh_sinh(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  const double c = (b - a) / 2.0, d = (a + b) / 2.0;
  const double t_max = 4.0;
  double prev = 0.0, value = 0.0;
  for (int level = 2; level <= 14; ++level) {
    double h = t_max / std::pow(2.0, level - 1) * 2.0;
    double sum = 0.0;
    for (double t = -t_max; t <= t_max + 1e-12; t += h) {
      double u = kPi / 2.0 * std::sinh(t);
      if (std::abs(u) > 350.0) continue;
      double x = d + c * std::tanh(u);
      double w = c * kPi / 2.0 * std::cosh(t) / (std::cosh(u) * std::cosh(u));
      if (x <= a || x >= b || w == 0.0) continue;
      sum += w * f(x);
    }
    sum *= h / 2.0;  // trapezoid in t with step h... step already h; factor below
    value = sum * 2.0;
    if (level > 4 && std::abs(value - prev) <= rel_tol * std::max(std::abs(value), 1e-300)) break;
    prev = value;
  }
  return value;
}

double log_integrand(double p, double x) {
  double y = p * std::sqrt(p * p + x);
  if (y > 700.0) return 0.0;
  return p * p * std::log1p(-std::exp(-y));
}

double deriv_integrand(double p, double x) {
  double root = std::sqrt(p * p + x);
  double y = p * root;
  if (y > 700.0) return 0.0;
  return p * p * p / root / std::expm1(y);
}

struct BoxModel {
  double A = 0.0;        // 4 pi a / L^3
  double B = 0.0;        // LHY coefficient of m^{5/2}
  double D = 0.0;        // error coefficient of m^{5/2+eta}
  double eta = 0.0;
  double K = 0.0;        // thermal prefactor L^3 T^{5/2}/(2 pi)^3
  double x_coeff = 0.0;  // argument scale: x = x_coeff * m

  double value(double m) const {
    if (m < 0.0) return std::numeric_limits<double>::infinity();
    double v = A * m * m + B * std::pow(m, 2.5) - D * std::pow(m, 2.5 + eta);
    if (K != 0.0 && m > 0.0) v += K * bogoliubov_integral(x_coeff * m);
    else if (K != 0.0) v += K * bogoliubov_integral(0.0);
    return v;
  }
  double deriv(double m) const {
    double v = 2.0 * A * m + 2.5 * B * std::pow(m, 1.5) - (2.5 + eta) * D * std::pow(m, 1.5 + eta);
    if (K != 0.0) v += K * x_coeff * bogoliubov_integral_deriv(x_coeff * std::max(m, 0.0));
    return v;
  }
};

BoxModel make_model(const GasParameters& p, double L_n, SplittingModel kind) {
  BoxModel m;
  const double vol = L_n * L_n * L_n;
  m.A = 4.0 * kPi * p.a / vol;
  if (kind == SplittingModel::full) {
    const double s = p.a * p.a * p.a / vol;  // a^3/L^3: m*s is the box rho*a^3
    m.eta = p.eta;
    m.B = m.A * kLhyCoeff * std::sqrt(s);
    m.D = m.A * p.C_thm * std::pow(s, 0.5 + p.eta);
    const double t_abs = p.T_absolute();
    if (t_abs > 0.0) {
      m.K = vol * std::pow(t_abs, 2.5) / std::pow(2.0 * kPi, 3);
      m.x_coeff = 16.0 * kPi * p.a / (vol * t_abs);
    }
  }
  return m;
}

double solve_m_star(const BoxModel& model, double mu, double scale_hint) {
  if (model.deriv(0.0) >= mu) return 0.0;
  double hi = std::max(scale_hint, 1.0);
  int guard = 0;
  while (model.deriv(hi) < mu) {
    hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("optimal_splitting: derivative never reaches mu");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = (lo + hi) / 2.0;
    (model.deriv(mid) < mu ? lo : hi) = mid;
    if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
  }
  return (lo + hi) / 2.0;
}

nlohmann::json inputs_json(const GasParameters& p) {
  nlohmann::json j{{"rho_a3", p.rho_a3}, {"a", p.a},         {"T", p.T},
                   {"eta", p.eta},       {"C", p.C_thm},     {"N", p.N}};
  if (p.box_side) j["box_side"] = *p.box_side;
  return j;
}

}  // namespace

double GasParameters::gp_eta_scale() const { return a * std::pow(rho_a3, -0.5 - eta); }

void GasParameters::validate() const {
  if (!(rho_a3 > 0.0) || !(rho_a3 < 1.0))
    throw std::invalid_argument("GasParameters: rho_a3 must lie in (0, 1)");
  if (!(a > 0.0)) throw std::invalid_argument("GasParameters: a must be positive");
  if (T < 0.0) throw std::invalid_argument("GasParameters: T must be nonnegative");
  if (!(N > 0.0)) throw std::invalid_argument("GasParameters: N must be positive");
  if (eta < 0.0) throw std::invalid_argument("GasParameters: eta must be nonnegative");
  if (C_thm < 0.0) throw std::invalid_argument("GasParameters: C must be nonnegative");
}

std::vector<std::string> GasParameters::regime_flags() const {
  std::vector<std::string> flags;
  if (T > std::pow(rho_a3, -eta))
    flags.push_back("temperature above theorem regime T <= rho a (rho a^3)^{-eta}");
  if (box_side) {
    if (*box_side < gp_eta_scale() * (1.0 - 1e-12))
      flags.push_back("box side below the GP+eta scale a (rho a^3)^{-1/2-eta}");
    double n_consistent = rho() * (*box_side) * (*box_side) * (*box_side);
    if (std::abs(n_consistent - N) > 1e-6 * std::max(1.0, N))
      flags.push_back("N inconsistent with rho * box_side^3");
  }
  return flags;
}

double bogoliubov_integral(double x) {
  if (x < 0.0) throw std::invalid_argument("bogoliubov_integral: x must be nonnegative");
  auto f = [x](double p) { return log_integrand(p, x); };
  return 4.0 * kPi * adaptive_gk(f, 0.0, kPCut, 1e-11);
}

double bogoliubov_integral_alt(double x) {
  if (x < 0.0) throw std::invalid_argument("bogoliubov_integral_alt: x must be nonnegative");
  auto f = [x](double p) { return log_integrand(p, x); };
  return 4.0 * kPi * tanh_sinh(f, 0.0, kPCut, 1e-11);
}

double bogoliubov_integral_deriv(double x) {
  if (x < 0.0) throw std::invalid_argument("bogoliubov_integral_deriv: x must be nonnegative");
  auto f = [x](double p) { return deriv_integrand(p, x); };
  return 2.0 * kPi * adaptive_gk(f, 0.0, kPCut, 1e-11);
}

double bogoliubov_series_zero() {
  const long n_terms = 100000;
  double zeta = 0.0;
  for (long n = n_terms; n >= 1; --n) zeta += std::pow(static_cast<double>(n), -2.5);
  zeta += (2.0 / 3.0) * std::pow(n_terms + 0.5, -1.5);  // midpoint tail of the integral test
  return -std::pow(kPi, 1.5) * zeta;
}

FreeEnergyBound free_energy_lower_bound(const GasParameters& p, double volume) {
  p.validate();
  if (!(volume > 0.0)) throw std::invalid_argument("free_energy_lower_bound: volume must be positive");
  FreeEnergyBound b;
  const double mf = 4.0 * kPi * p.rho() * p.a * p.N;
  b.mean_field_term = mf;
  b.lhy_term = mf * kLhyCoeff * std::sqrt(p.rho_a3);
  b.error_term = -mf * p.C_thm * std::pow(p.rho_a3, 0.5 + p.eta);
  const double t_abs = p.T_absolute();
  if (t_abs > 0.0) {
    const double x = 16.0 * kPi * p.rho() * p.a / t_abs;
    b.thermal_term = volume * std::pow(t_abs, 2.5) / std::pow(2.0 * kPi, 3) * bogoliubov_integral(x);
  }
  b.total = b.mean_field_term + b.lhy_term + b.error_term + b.thermal_term;
  return b;
}

CondensationReport strong_condensation_bound(const GasParameters& p, double epsilon) {
  p.validate();
  CondensationReport r;
  r.epsilon = epsilon;
  r.scale_R = std::pow(p.rho_a3, -0.5 - p.eta);
  r.bound_on_n_plus = p.C_thm * p.N * std::pow(p.rho_a3, 0.5 - p.eta);
  const double l_abs = r.scale_R * p.a;
  r.intermediate_bound =
      p.C_thm * l_abs * l_abs * p.N * p.rho() * p.a * std::pow(p.rho_a3, 0.5 + p.eta);
  r.depletion_fraction = r.bound_on_n_plus / p.N;
  r.condensed = r.depletion_fraction <= epsilon;
  return r;
}

CondensationReport propagate_condensation(const GasParameters& p, double R_over_a,
                                          double epsilon) {
  p.validate();
  const double gp_scale = std::pow(p.rho_a3, -0.5 - p.eta);
  if (R_over_a < gp_scale * (1.0 - 1e-12))
    throw std::invalid_argument(
        "propagate_condensation: R below a (rho a^3)^{-1/2-eta}; the corollary does not apply");
  CondensationReport r;
  r.epsilon = epsilon;
  r.scale_R = R_over_a;
  const double r_abs = R_over_a * p.a;
  r.bound_on_n_plus = p.C_thm * p.N * p.rho() * r_abs * r_abs * p.a * std::pow(p.rho_a3, 0.5 + p.eta);
  r.depletion_fraction = r.bound_on_n_plus / p.N;
  r.condensed = r.depletion_fraction <= epsilon;
  r.r_max_over_a = std::sqrt(epsilon / p.C_thm) * std::pow(p.rho_a3, -0.75 - p.eta / 2.0);
  return r;
}

double kappa_condensation_threshold(double eta) {
  if (eta < 0.0) throw std::invalid_argument("kappa_condensation_threshold: eta must be >= 0");
  return (2.0 + 2.0 * eta) / (5.0 + 3.0 * eta);
}

Rational kappa_condensation_threshold(const Rational& eta) {
  if (eta.sign() < 0) throw std::invalid_argument("kappa_condensation_threshold: eta must be >= 0");
  return (Rational(2) + Rational(2) * eta) / (Rational(5) + Rational(3) * eta);
}

SplittingSolution optimal_splitting(const GasParameters& p, double L_n, double mu,
                                    SplittingModel model) {
  p.validate();
  if (!(L_n > 0.0)) throw std::invalid_argument("optimal_splitting: L_n must be positive");
  if (mu < 0.0) throw std::invalid_argument("optimal_splitting: mu must be nonnegative");

  BoxModel bm = make_model(p, L_n, model);
  SplittingSolution sol;
  sol.box_side = L_n;
  sol.mu = mu;
  const double vol = L_n * L_n * L_n;
  sol.m_star = mu == 0.0 ? 0.0 : solve_m_star(bm, mu, p.rho() * vol);
  sol.f_at_m_star = bm.value(sol.m_star);
  sol.admissibility_cap = 3.0 * mu * vol / (4.0 * kPi * p.a);
  sol.within_cap = sol.m_star <= sol.admissibility_cap * (1.0 + 1e-12) + 1e-300;

  // Convexity audit by second differences on the working range.
  const int samples = 41;
  double hi = std::max({2.0 * sol.m_star, sol.admissibility_cap, p.rho() * vol, 1.0});
  std::vector<double> f(samples);
  double f_scale = 1.0;
  for (int i = 0; i < samples; ++i) {
    f[i] = bm.value(hi * i / (samples - 1));
    f_scale = std::max(f_scale, std::abs(f[i]));
  }
  sol.convex_ok = true;
  for (int i = 1; i + 1 < samples; ++i)
    if (f[i + 1] - 2.0 * f[i] + f[i - 1] < -1e-9 * f_scale) sol.convex_ok = false;
  return sol;
}

double find_balancing_mu(const GasParameters& p, double L_n, SplittingModel model) {
  p.validate();
  if (!(L_n > 0.0)) throw std::invalid_argument("find_balancing_mu: L_n must be positive");
  BoxModel bm = make_model(p, L_n, model);
  const double target = p.rho() * L_n * L_n * L_n;
  if (!(target > 0.0)) throw std::invalid_argument("find_balancing_mu: empty target occupation");

  auto m_star_of = [&](double mu) { return mu <= 0.0 ? 0.0 : solve_m_star(bm, mu, target); };
  double hi = std::max(bm.deriv(target), 1e-30);
  int guard = 0;
  while (m_star_of(hi) < target) {
    hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("find_balancing_mu: failed to bracket mu");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = (lo + hi) / 2.0;
    (m_star_of(mid) < target ? lo : hi) = mid;
    if (hi - lo <= 1e-13 * hi) break;
  }
  return (lo + hi) / 2.0;
}

std::string free_energy_to_json(const GasParameters& p, const FreeEnergyBound& b, double volume) {
  nlohmann::json j{{"inputs", inputs_json(p)},
                   {"volume", volume},
                   {"terms",
                    {{"mean_field_term", b.mean_field_term},
                     {"lhy_term", b.lhy_term},
                     {"error_term", b.error_term},
                     {"thermal_term", b.thermal_term}}},
                   {"bound", b.total},
                   {"regime_flags", p.regime_flags()}};
  return j.dump(2);
}

std::string condensation_to_json(const GasParameters& p, const CondensationReport& r,
                                 const std::string& kind) {
  nlohmann::json j{{"inputs", inputs_json(p)},
                   {"kind", kind},
                   {"scale_R", r.scale_R},
                   {"bound_on_n_plus", r.bound_on_n_plus},
                   {"depletion_fraction", r.depletion_fraction},
                   {"condensed", r.condensed},
                   {"epsilon", r.epsilon},
                   {"regime_flags", p.regime_flags()}};
  if (r.intermediate_bound) j["intermediate_bound"] = *r.intermediate_bound;
  if (r.r_max_over_a) j["r_max_over_a"] = *r.r_max_over_a;
  return j.dump(2);
}

std::string splitting_to_json(const GasParameters& p, const SplittingSolution& s) {
  nlohmann::json j{{"inputs", inputs_json(p)},
                   {"box_side", s.box_side},
                   {"mu", s.mu},
                   {"m_star", s.m_star},
                   {"f_at_m_star", s.f_at_m_star},
                   {"admissibility_cap", s.admissibility_cap},
                   {"within_cap", s.within_cap},
                   {"convex_ok", s.convex_ok}};
  return j.dump(2);
}

}  // namespace locgap
