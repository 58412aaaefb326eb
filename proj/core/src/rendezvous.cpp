#include "ftvs/rendezvous.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Cholesky>

namespace ftvs {

void RendezvousProblem::validate() const {
  if (!(a_max > 0.0)) throw std::invalid_argument("RendezvousProblem: a_max must be positive");
  if (!r0.allFinite() || !r0_dot.allFinite() || !std::isfinite(t)) {
    throw std::invalid_argument("RendezvousProblem: non-finite boundary state");
  }
}

std::pair<Vec3, Vec3> predict_grapple(const TargetState& target, double t, double tf) {
  if (tf < t) throw std::invalid_argument("predict_grapple: tf precedes t");
  const TargetState x = propagate_noise_free(target, tf - t, 0.01);
  return {grapple_position(x), grapple_velocity(x)};
}

GrappleEphemeris::GrappleEphemeris(const TargetState& target, double t0, double step)
    : nodes_{target}, t0_(t0), step_(step) {
  if (!(step > 0.0)) throw std::invalid_argument("GrappleEphemeris: step must be positive");
}

void GrappleEphemeris::extend_to(std::size_t node) {
  nodes_.reserve(node + 1);
  while (nodes_.size() <= node) nodes_.push_back(rk4_step(nodes_.back(), step_));
}

std::pair<Vec3, Vec3> GrappleEphemeris::at(double tf) {
  const double s = tf - t0_;
  if (s < 0.0) throw std::invalid_argument("GrappleEphemeris::at: time precedes epoch");
  const auto i = static_cast<std::size_t>(std::floor(s / step_));
  extend_to(i);
  const double rem = s - static_cast<double>(i) * step_;
  if (rem <= 0.0) return {grapple_position(nodes_[i]), grapple_velocity(nodes_[i])};
  const TargetState x = rk4_step(nodes_[i], rem);
  return {grapple_position(x), grapple_velocity(x)};
}

Vec3 control_of(const Chi& chi, double tau, double a_max) {
  const Vec3 p = chi.c2 - chi.c1 * tau;
  const double n = p.norm();
  const double tol = 1e-12 * (chi.c2.norm() + chi.c1.norm() * std::abs(tau));
  if (n > tol) return -a_max * p / n;
  const double c1n = chi.c1.norm();
  if (c1n > 0.0) return -a_max * chi.c1 / c1n;
  throw std::invalid_argument("control_of: costate vanishes identically");
}

namespace {

constexpr int kGaussPoints = 24;

struct GaussLegendre {
  std::array<double, kGaussPoints> x{};
  std::array<double, kGaussPoints> w{};
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre gl = [] {
    GaussLegendre g;
    const int n = kGaussPoints;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      g.x[i] = z;
      g.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return g;
  }();
  return gl;
}

// I0 = ∫₀ˢ p̂ ds and I1 = ∫₀ˢ s p̂ ds for p(s) = c2p − c1 s.
std::pair<Vec3, Vec3> costate_integrals(const Vec3& c1, const Vec3& c2p, double S) {
  if (S <= 0.0) return {Vec3::Zero(), Vec3::Zero()};
  const double A = c1.squaredNorm();
  const double sstar = A > 0.0 ? c1.dot(c2p) / A : std::numeric_limits<double>::infinity();

  if (!(std::abs(sstar - 0.5 * S) <= 1.5 * S)) {
    // The zero of ‖p‖ (real or complex) is at least S away: the integrand is
    // analytic on a wide ellipse and Gauss quadrature is exact to round-off.
    const auto& gl = gauss_legendre();
    Vec3 I0 = Vec3::Zero();
    Vec3 I1 = Vec3::Zero();
    for (int i = 0; i < kGaussPoints; ++i) {
      const double s = 0.5 * S * (gl.x[i] + 1.0);
      const Vec3 p = c2p - c1 * s;
      const double n = p.norm();
      if (!(n > 0.0)) throw std::invalid_argument("costate_integrals: costate vanishes");
      const Vec3 ph = p / n;
      I0 += gl.w[i] * ph;
      I1 += gl.w[i] * s * ph;
    }
    return {0.5 * S * I0, 0.5 * S * I1};
  }

  const double sA = std::sqrt(A);
  const Vec3 pstar = c2p - c1 * sstar;
  const double k = pstar.norm() / sA;
  const double s0 = -sstar;
  const double s1 = S - sstar;
  const double R0 = std::hypot(s0, k);
  const double R1 = std::hypot(s1, k);
  const double dR = (R0 + R1) > 0.0 ? (s1 - s0) * (s1 + s0) / (R1 + R0) : 0.0;
  double dAs = 0.0;  // asinh(s1/k) − asinh(s0/k)
  const bool straight = k <= 1e-12 * std::max(std::abs(s0), std::abs(s1));
  if (!straight) {
    const double x = s1 / k;
    const double y = s0 / k;
    const double qx = std::sqrt(1.0 + x * x);
    const double qy = std::sqrt(1.0 + y * y);
    const double arg = (x * y > 0.0) ? (x - y) * (x + y) / (x * qy + y * qx) : x * qy - y * qx;
    dAs = std::asinh(arg);
  }
  const double dG = (s1 - s0) * R1 + s0 * dR;  // σ√(σ²+k²) difference
  Vec3 I0 = (-c1 * dR) / sA;
  Vec3 I1s = (pstar * dR - c1 * 0.5 * dG) / sA;
  if (!straight) {
    I0 += pstar * dAs / sA;
    I1s += c1 * (0.5 * k * k * dAs) / sA;
  }
  return {I0, I1s + sstar * I0};
}

}  // namespace

std::pair<Vec3, Vec3> control_integrals(const Chi& chi, double t, double tau, double a_max) {
  const double S = tau - t;
  const Vec3 c2p = chi.c2 - chi.c1 * t;
  const auto [I0, I1] = costate_integrals(chi.c1, c2p, S);
  return {-a_max * I0, -a_max * (S * I0 - I1)};
}

double hamiltonian(const Chi& chi, double tau, const Vec3& r_dot, double a_max) {
  return 1.0 + chi.c1.dot(r_dot) - a_max * (chi.c2 - chi.c1 * tau).norm();
}

double hamiltonian_gap(const Chi& chi, const RendezvousProblem& pb) {
  const auto [V, P] = control_integrals(chi, pb.t, chi.tf, pb.a_max);
  (void)P;
  return hamiltonian(chi, pb.t, pb.r0_dot, pb.a_max) -
         hamiltonian(chi, chi.tf, pb.r0_dot + V, pb.a_max);
}

ShootingVec shooting_residual_vector(const Chi& chi, const RendezvousProblem& pb,
                                     GrappleEphemeris& eph) {
  if (chi.tf < pb.t) throw std::invalid_argument("shooting_residual: tf precedes t");
  const double T = chi.tf - pb.t;
  const auto [V, P] = control_integrals(chi, pb.t, chi.tf, pb.a_max);
  const auto [rho, rho_dot] = eph.at(chi.tf);
  ShootingVec e;
  e.head<3>() = pb.r0_dot + V - rho_dot;
  e.segment<3>(3) = pb.r0 + pb.r0_dot * T + P - rho;
  e(6) = hamiltonian(chi, pb.t, pb.r0_dot, pb.a_max) -
         hamiltonian(chi, chi.tf, pb.r0_dot + V, pb.a_max);
  return e;
}

double shooting_residual(const Chi& chi, const RendezvousProblem& pb) {
  GrappleEphemeris eph(pb.target, pb.t);
  return shooting_residual_vector(chi, pb, eph).norm();
}

Vec3 RendezvousSolution::control(double tau) const { return control_of(chi, tau, a_max); }

std::pair<Vec3, Vec3> RendezvousSolution::state_at(double tau) const {
  const double s = tau - t0;
  if (s <= 0.0) return {r0, r0_dot};
  const auto [V, P] = control_integrals(chi, t0, tau, a_max);
  return {r0 + r0_dot * s + P, r0_dot + V};
}

void sample_trajectory(RendezvousSolution& sol, double period) {
  sol.trajectory.clear();
  const double span = sol.chi.tf - sol.t0;
  const long n = span > 0.0 ? static_cast<long>(std::floor(span / period + 1e-9)) : 0;
  auto push = [&](double tau) {
    const auto [r, rd] = sol.state_at(tau);
    Vec3 u = Vec3::Zero();
    if (span > 0.0) u = sol.control(tau);
    sol.trajectory.push_back({tau, r, rd, u});
  };
  for (long i = 0; i <= n; ++i) push(sol.t0 + static_cast<double>(i) * period);
  if (sol.trajectory.back().t < sol.chi.tf) push(sol.chi.tf);
}

namespace {

using Vec7 = ShootingVec;
using Mat7 = Eigen::Matrix<double, 7, 7>;

struct LmOutcome {
  Vec7 x;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

Chi to_chi(const Vec7& x, double t) {
  Chi c;
  c.c1 = x.head<3>();
  c.c2 = x.segment<3>(3) + c.c1 * t;
  c.tf = t + x(6);
  return c;
}

Vec7 from_chi(const Chi& c, double t) {
  Vec7 x;
  x.head<3>() = c.c1;
  x.segment<3>(3) = c.c2 - c.c1 * t;
  x(6) = c.tf - t;
  return x;
}

// The residual is invariant to a common positive scale of (c₁, c₂); pin it.
void normalize_scale(Vec7& x, double t) {
  const Vec3 c1 = x.head<3>();
  const Vec3 c2 = x.segment<3>(3) + c1 * t;
  const double n = std::sqrt(c1.squaredNorm() + c2.squaredNorm());
  if (n > 0.0 && std::isfinite(n)) x.head<6>() /= n;
}

LmOutcome levenberg_marquardt(Vec7 x, const RendezvousProblem& pb, GrappleEphemeris& eph,
                              const SolverConfig& cfg) {
  constexpr double kMinHorizon = 1e-6;
  auto eval = [&](const Vec7& v, Vec7& r) -> bool {
    if (!(v(6) > kMinHorizon) || !(v(6) <= cfg.max_horizon) || !v.allFinite()) return false;
    try {
      r = shooting_residual_vector(to_chi(v, pb.t), pb, eph);
    } catch (const std::invalid_argument&) {
      return false;
    }
    return r.allFinite();
  };

  LmOutcome out;
  normalize_scale(x, pb.t);
  Vec7 r;
  if (!eval(x, r)) {
    out.x = x;
    return out;
  }
  double cost = r.norm();
  double lambda = 1e-3;
  int it = 0;
  // Iterate past the acceptance tolerance so accepted solutions carry margin.
  const double polish = cfg.tolerance * 1e-3;
  for (; it < cfg.max_iterations && cost >= polish; ++it) {
    Mat7 J;
    bool ok = true;
    for (int i = 0; i < 7 && ok; ++i) {
      Vec7 xp = x;
      const double h = cfg.fd_step * std::max(std::abs(x(i)), 1.0);
      xp(i) += h;
      Vec7 rp;
      ok = eval(xp, rp);
      if (ok) J.col(i) = (rp - r) / h;
    }
    if (!ok) break;
    const Mat7 JtJ = J.transpose() * J;
    const Vec7 g = J.transpose() * r;
    const double dscale = std::max(JtJ.diagonal().maxCoeff(), 1e-300);
    Vec7 D = JtJ.diagonal().cwiseMax(1e-12 * dscale);
    bool accepted = false;
    while (lambda < 1e16) {
      Mat7 Aug = JtJ;
      Aug.diagonal() += lambda * D;
      const Vec7 step = Aug.ldlt().solve(-g);
      Vec7 xn = x + step;
      Vec7 rn;
      if (step.allFinite() && eval(xn, rn) && rn.norm() < cost) {
        normalize_scale(xn, pb.t);
        eval(xn, rn);
        x = xn;
        r = rn;
        cost = rn.norm();
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
  }
  out.x = x;
  out.residual = cost;
  out.iterations = it;
  out.converged = cost < cfg.tolerance;
  return out;
}

RendezvousSolution make_solution(const RendezvousProblem& pb, const LmOutcome& lm, int start,
                                 const SolverConfig& cfg) {
  RendezvousSolution sol;
  sol.chi = to_chi(lm.x, pb.t);
  sol.t0 = pb.t;
  sol.r0 = pb.r0;
  sol.r0_dot = pb.r0_dot;
  sol.a_max = pb.a_max;
  sol.residual = lm.residual;
  sol.start_index = start;
  sol.iterations = lm.iterations;
  sample_trajectory(sol, cfg.sample_period);
  return sol;
}

std::vector<Vec7> multistart_points(const RendezvousProblem& pb, GrappleEphemeris& eph,
                                    const SolverConfig& cfg) {
  std::vector<Vec7> starts;
  std::vector<Vec3> dirs;
  for (double T : cfg.start_horizons) {
    const Vec3 d = eph.at(pb.t + T).first - pb.r0;
    const double n = d.norm();
    dirs.push_back(n > 0.0 ? Vec3(d / n) : Vec3::UnitX());
  }
  for (std::size_t i = 0; i < cfg.start_horizons.size(); ++i) {
    for (double sign : {1.0, -1.0}) {
      Vec7 x;
      x.head<3>().setZero();
      x.segment<3>(3) = sign * dirs[i];
      x(6) = cfg.start_horizons[i];
      starts.push_back(x);
    }
  }
  if (cfg.midpoint_starts) {
    for (std::size_t i = 0; i < cfg.start_horizons.size(); ++i) {
      const double T = cfg.start_horizons[i];
      Vec7 x;
      x.segment<3>(3) = -dirs[i];
      x.head<3>() = -(2.0 / T) * dirs[i];
      x(6) = T;
      starts.push_back(x);
    }
  }
  return starts;
}

}  // namespace

RendezvousSolution solve_rendezvous(const RendezvousProblem& pb, const SolverConfig& cfg) {
  pb.validate();
  GrappleEphemeris eph(pb.target, pb.t, cfg.ephemeris_step);

  const auto [rho_now, rho_dot_now] = eph.at(pb.t);
  if ((pb.r0 - rho_now).norm() <= cfg.coincidence_tol &&
      (pb.r0_dot - rho_dot_now).norm() <= cfg.coincidence_tol) {
    RendezvousSolution sol;
    sol.chi.c2 = Vec3::UnitX();
    sol.chi.tf = pb.t;
    sol.t0 = pb.t;
    sol.r0 = pb.r0;
    sol.r0_dot = pb.r0_dot;
    sol.a_max = pb.a_max;
    sol.residual = std::max((pb.r0 - rho_now).norm(), (pb.r0_dot - rho_dot_now).norm());
    sample_trajectory(sol, cfg.sample_period);
    return sol;
  }

  const auto starts = multistart_points(pb, eph, cfg);
  int best = -1;
  LmOutcome best_lm;
  double best_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const LmOutcome lm = levenberg_marquardt(starts[i], pb, eph, cfg);
    best_residual = std::min(best_residual, lm.residual);
    if (!lm.converged) continue;
    if (best < 0 || lm.x(6) < best_lm.x(6) - 1e-9) {
      best = static_cast<int>(i);
      best_lm = lm;
    }
  }
  if (best < 0) throw SolverFailure("solve_rendezvous: no start converged", best_residual);
  return make_solution(pb, best_lm, best, cfg);
}

RendezvousSolution replan(const RendezvousProblem& pb, const RendezvousSolution& previous,
                          const SolverConfig& cfg, bool* replaced) {
  if (replaced) *replaced = false;
  pb.validate();
  if (previous.chi.tf > pb.t + 1e-6) {
    GrappleEphemeris eph(pb.target, pb.t, cfg.ephemeris_step);
    const LmOutcome lm = levenberg_marquardt(from_chi(previous.chi, pb.t), pb, eph, cfg);
    if (lm.converged) {
      if (replaced) *replaced = true;
      return make_solution(pb, lm, -1, cfg);
    }
  }
  try {
    RendezvousSolution sol = solve_rendezvous(pb, cfg);
    if (replaced) *replaced = true;
    return sol;
  } catch (const SolverFailure&) {
    return previous;
  }
}

void write_trajectory_csv(std::ostream& out, const RendezvousSolution& sol) {
  const auto old_prec = out.precision(17);
  out << "t,r_x,r_y,r_z,rdot_x,rdot_y,rdot_z,u_x,u_y,u_z,tf,residual\n";
  for (const auto& s : sol.trajectory) {
    out << s.t << ',' << s.r.x() << ',' << s.r.y() << ',' << s.r.z() << ',' << s.r_dot.x() << ','
        << s.r_dot.y() << ',' << s.r_dot.z() << ',' << s.u.x() << ',' << s.u.y() << ',' << s.u.z()
        << ',' << sol.chi.tf << ',' << sol.residual << '\n';
  }
  out.precision(old_prec);
}

}  // namespace ftvs
