// Copyright 2026 The QONN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qonn/optimizers.hpp"

namespace qonn {
namespace detail {

Eigen::MatrixXd kkt_matrix(const Eigen::MatrixXd& points) {
  const Eigen::Index p = points.rows();
  const Eigen::Index d = points.cols();
  const Eigen::Index n = p + d + 1;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd gram = points * points.transpose();
  w.topLeftCorner(p, p) = 0.5 * gram.array().square().matrix();
  w.block(0, p, p, 1).setOnes();
  w.block(p, 0, 1, p).setOnes();
  w.block(0, p + 1, p, d) = points;
  w.block(p + 1, 0, d, p) = points.transpose();
  return w;
}

Eigen::MatrixXd inverse_kkt(const Eigen::MatrixXd& points) {
  const Eigen::Index p = points.rows();
  const Eigen::Index d = points.cols();
  double scale = points.rowwise().norm().maxCoeff();
  if (!(scale > 0.0)) scale = 1.0;
  // W = D W_hat D with D = diag(s^2 I_p, s^-2, s^-1 I_d).
  Eigen::MatrixXd inv = kkt_matrix(points / scale).partialPivLu().inverse();
  Eigen::VectorXd dinv(p + d + 1);
  dinv.head(p).setConstant(1.0 / (scale * scale));
  dinv(p) = scale * scale;
  dinv.tail(d).setConstant(scale);
  return dinv.asDiagonal() * inv * dinv.asDiagonal();
}

ReplacementTerms replacement_terms(const Eigen::MatrixXd& inverse, const Eigen::MatrixXd& points,
                                   const Eigen::VectorXd& y_new) {
  const Eigen::Index p = points.rows();
  const Eigen::Index d = points.cols();
  Eigen::VectorXd w(p + d + 1);
  w.head(p) = 0.5 * (points * y_new).array().square().matrix();
  w(p) = 1.0;
  w.tail(d) = y_new;
  ReplacementTerms out;
  out.v = inverse * w;
  const double ysq = y_new.squaredNorm();
  out.beta = 0.5 * ysq * ysq - w.dot(out.v);
  return out;
}

double replacement_denominator(const Eigen::MatrixXd& inverse, const ReplacementTerms& terms,
                               Eigen::Index t) {
  const double tau = terms.v(t);
  return inverse(t, t) * terms.beta + tau * tau;
}

void replace_point(Eigen::MatrixXd& inverse, const ReplacementTerms& terms, Eigen::Index t) {
  const double alpha = inverse(t, t);
  const double tau = terms.v(t);
  const double sigma = alpha * terms.beta + tau * tau;
  Eigen::VectorXd u = -terms.v;
  u(t) += 1.0;
  const Eigen::VectorXd h = inverse.col(t);
  const Eigen::VectorXd a = (alpha * u + tau * h) / sigma;
  const Eigen::VectorXd b = (tau * u - terms.beta * h) / sigma;
  // Symmetric rank-2 update written column by column to avoid temporaries.
  for (Eigen::Index j = 0; j < inverse.cols(); ++j) {
    inverse.col(j) += u(j) * a + h(j) * b;
  }
}

Eigen::VectorXd trust_region_step(const Eigen::VectorXd& g,
                                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& hess,
                                  double delta, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi) {
  const Eigen::Index d = g.size();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
  std::vector<bool> fixed(static_cast<std::size_t>(d), false);
  // Variables sitting on a bound with the descent direction pointing out.
  for (Eigen::Index i = 0; i < d; ++i) {
    if ((lo(i) >= 0.0 && g(i) > 0.0) || (hi(i) <= 0.0 && g(i) < 0.0)) {
      fixed[static_cast<std::size_t>(i)] = true;
    }
  }
  auto project = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (fixed[static_cast<std::size_t>(i)]) v(i) = 0.0;
    }
    return v;
  };
  Eigen::VectorXd r = project(-g);
  Eigen::VectorXd dir = r;
  double rr = r.squaredNorm();
  const double stop = 1e-20 * std::max(1.0, g.squaredNorm());
  const Eigen::Index max_iter = 2 * d + 10;
  for (Eigen::Index iter = 0; iter < max_iter && rr > stop; ++iter) {
    const Eigen::VectorXd hd = project(hess(dir));
    const double dhd = dir.dot(hd);
    // Step to the trust-region boundary: |s + a dir| = delta.
    const double dd = dir.squaredNorm();
    const double sd = s.dot(dir);
    const double ss = s.squaredNorm();
    const double disc = std::max(0.0, sd * sd + dd * (delta * delta - ss));
    const double a_tr = (std::sqrt(disc) - sd) / dd;
    // Step to the nearest bound.
    double a_bound = std::numeric_limits<double>::infinity();
    Eigen::Index hit = -1;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (fixed[static_cast<std::size_t>(i)] || dir(i) == 0.0) continue;
      const double room = dir(i) > 0.0 ? (hi(i) - s(i)) / dir(i) : (lo(i) - s(i)) / dir(i);
      if (room < a_bound) {
        a_bound = std::max(room, 0.0);
        hit = i;
      }
    }
    const double a_cg = dhd > 0.0 ? rr / dhd : std::numeric_limits<double>::infinity();
    const double a = std::min({a_cg, a_tr, a_bound});
    s += a * dir;
    if (a == a_tr && a < a_bound) break;
    if (hit >= 0 && a == a_bound) {
      s(hit) = dir(hit) > 0.0 ? hi(hit) : lo(hit);
      fixed[static_cast<std::size_t>(hit)] = true;
      r = project(-(g + hess(s)));
      dir = r;
      rr = r.squaredNorm();
      continue;
    }
    r -= a * hd;
    const double rr_new = r.squaredNorm();
    dir = r + (rr_new / rr) * dir;
    rr = rr_new;
  }
  return s;
}

}  // namespace detail

void LocalSearchConfig::validate() const {
  if (!(initial_radius > 0.0) || !(final_radius > 0.0) || final_radius > initial_radius) {
    throw std::invalid_argument("LocalSearchConfig: need 0 < final_radius <= initial_radius");
  }
  if (!(cost_tolerance >= 0.0)) {
    throw std::invalid_argument("LocalSearchConfig: cost_tolerance must be >= 0");
  }
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("LocalSearchConfig: lower and upper bounds differ in size");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

// Counts evaluations, tracks the best point and the improvement trace.
class Evaluator {
 public:
  Evaluator(const Objective& f, const LocalSearchConfig& config)
      : f_(f), config_(config), start_(Clock::now()) {}

  bool exhausted() const { return result_.evaluations >= config_.max_evaluations; }
  bool reached_target() const { return result_.value <= config_.target; }

  // Returns the value used for model building (finite).
  double operator()(const Eigen::VectorXd& x) {
    const double raw = f_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    ++result_.evaluations;
    double value = raw;
    if (!std::isfinite(raw)) {
      ++result_.nonfinite_evaluations;
      value = std::numeric_limits<double>::infinity();
    } else {
      worst_finite_ = std::max(worst_finite_, raw);
      best_finite_ = std::min(best_finite_, raw);
    }
    if (result_.x.empty() || value < result_.value) {
      result_.x.assign(x.data(), x.data() + x.size());
      if (value < result_.value) {
        result_.value = value;
        result_.trace.push_back(
            {result_.evaluations, value,
             std::chrono::duration<double>(Clock::now() - start_).count()});
      }
    }
    if (std::isfinite(value)) return value;
    // Surrogate for the model: above everything finite seen so far.
    if (!std::isfinite(worst_finite_)) return 1.0;
    return worst_finite_ + std::max(1.0, worst_finite_ - best_finite_);
  }

  LocalSearchResult finish(bool converged, std::string reason) {
    result_.converged = converged;
    result_.stop_reason = std::move(reason);
    return std::move(result_);
  }

 private:
  const Objective& f_;
  const LocalSearchConfig& config_;
  Clock::time_point start_;
  LocalSearchResult result_;
  double worst_finite_ = -std::numeric_limits<double>::infinity();
  double best_finite_ = std::numeric_limits<double>::infinity();
};

}  // namespace

LocalSearchResult minimize_local(const Objective& f, std::span<const double> x0,
                                 const LocalSearchConfig& config) {
  config.validate();
  const auto d = static_cast<Eigen::Index>(x0.size());
  if (d < 1) throw std::invalid_argument("minimize_local: dimension must be >= 1");
  if (config.max_evaluations == 0) {
    LocalSearchResult r;
    r.x.assign(x0.begin(), x0.end());
    r.stop_reason = "budget";
    return r;
  }
  const bool bounded = !config.lower.empty();
  if (bounded && config.lower.size() != x0.size()) {
    throw std::invalid_argument("minimize_local: bounds do not match the dimension");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lb = Eigen::VectorXd::Constant(d, -kInf);
  Eigen::VectorXd ub = Eigen::VectorXd::Constant(d, kInf);
  if (bounded) {
    lb = Eigen::Map<const Eigen::VectorXd>(config.lower.data(), d);
    ub = Eigen::Map<const Eigen::VectorXd>(config.upper.data(), d);
  }
  double rho = config.initial_radius;
  const double rho_end = config.final_radius;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (x0[static_cast<std::size_t>(i)] < lb(i) || x0[static_cast<std::size_t>(i)] > ub(i)) {
      throw std::invalid_argument("minimize_local: x0 violates the bounds");
    }
    if (ub(i) - lb(i) < 2.0 * rho) {
      throw std::invalid_argument("minimize_local: bound gap below 2 * initial_radius");
    }
  }

  Evaluator eval(f, config);
  const Eigen::Index p = 2 * d + 1;
  Eigen::VectorXd xbase = Eigen::Map<const Eigen::VectorXd>(x0.data(), d);
  Eigen::MatrixXd ypts = Eigen::MatrixXd::Zero(p, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::Index filled = 0;
    for (double step : {1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 0.25, -0.25}) {
      const double off = step * rho;
      if (xbase(i) + off < lb(i) || xbase(i) + off > ub(i)) continue;
      ypts(1 + 2 * i + filled, i) = off;
      if (++filled == 2) break;
    }
  }
  Eigen::VectorXd fval(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    if (eval.exhausted()) return eval.finish(false, "budget");
    fval(k) = eval(xbase + ypts.row(k).transpose());
    if (eval.reached_target()) return eval.finish(true, "target");
  }
  Eigen::Index kopt = 0;
  fval.minCoeff(&kopt);

  Eigen::MatrixXd inverse = detail::inverse_kkt(ypts);
  Eigen::VectorXd pq(p);
  Eigen::VectorXd gq(d);
  Eigen::MatrixXd hq = Eigen::MatrixXd::Zero(d, d);
  {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + d + 1);
    rhs.head(p) = fval.array() - fval(kopt);
    const Eigen::VectorXd coeff = inverse * rhs;
    pq = coeff.head(p);
    gq = coeff.tail(d);
  }

  auto hess_vec = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return hq * v + ypts.transpose() * (pq.array() * (ypts * v).array()).matrix();
  };
  // Folds the implicit part of the Hessian into hq.
  auto fold_implicit = [&]() {
    hq += ypts.transpose() * pq.asDiagonal() * ypts;
    pq.setZero();
  };

  double delta = rho;
  double f_at_last_rho = fval(kopt);

  // Replaces point t by y_new with value f_new and updates the model.
  auto update = [&](Eigen::Index t, const Eigen::VectorXd& y_new, double f_new,
                    const detail::ReplacementTerms& terms) {
    const Eigen::VectorXd y_opt = ypts.row(kopt).transpose();
    const Eigen::VectorXd step = y_new - y_opt;
    const Eigen::VectorXd gopt = gq + hess_vec(y_opt);
    const double predicted = gopt.dot(step) + 0.5 * step.dot(hess_vec(step));
    const double residual = f_new - fval(kopt) - predicted;
    hq += pq(t) * ypts.row(t).transpose() * ypts.row(t);
    pq(t) = 0.0;
    detail::replace_point(inverse, terms, t);
    ypts.row(t) = y_new.transpose();
    fval(t) = f_new;
    pq += residual * inverse.col(t).head(p);
    gq += residual * inverse.col(t).tail(d);
    if (f_new < fval(kopt)) kopt = t;
  };

  auto farthest = [&](double threshold_sq, double& dist_sq) -> Eigen::Index {
    Eigen::Index knew = -1;
    dist_sq = threshold_sq;
    for (Eigen::Index k = 0; k < p; ++k) {
      const double dsq = (ypts.row(k) - ypts.row(kopt)).squaredNorm();
      if (dsq > dist_sq) {
        dist_sq = dsq;
        knew = k;
      }
    }
    return knew;
  };

  // Moves point knew to maximise |l_knew| within radius `adelt` of y_opt.
  auto geometry_step = [&](Eigen::Index knew, double adelt) -> bool {
    const Eigen::VectorXd y_opt = ypts.row(kopt).transpose();
    const Eigen::VectorXd lambda = inverse.col(knew).head(p);
    const Eigen::VectorXd gl = inverse.col(knew).tail(d) +
                               ypts.transpose() * (lambda.array() * (ypts * y_opt).array()).matrix();
    const Eigen::VectorXd ygl = ypts * gl;
    const double gl_opt = gl.dot(y_opt);
    double best_abs = -1.0;
    Eigen::VectorXd best_step = Eigen::VectorXd::Zero(d);
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k == kopt) continue;
      const Eigen::VectorXd dir = (ypts.row(k) - ypts.row(kopt)).transpose();
      const double len = dir.norm();
      if (len == 0.0) continue;
      const double slope = ygl(k) - gl_opt;
      const double curve = (k == knew ? 1.0 : 0.0) - slope;
      const double amax = adelt / len;
      auto value = [&](double a) { return a * slope + a * a * curve; };
      for (double a : {amax, -amax}) {
        if (std::abs(value(a)) > best_abs) {
          best_abs = std::abs(value(a));
          best_step = a * dir;
        }
      }
      if (curve != 0.0) {
        const double a = -slope / (2.0 * curve);
        if (std::abs(a) < amax && std::abs(value(a)) > best_abs) {
          best_abs = std::abs(value(a));
          best_step = a * dir;
        }
      }
    }
    const double glnorm = gl.norm();
    if (glnorm > 0.0) {
      for (double sign : {1.0, -1.0}) {
        const Eigen::VectorXd u = sign * adelt / glnorm * gl;
        const double v = gl.dot(u) + 0.5 * (lambda.array() * (ypts * u).array().square()).sum();
        if (std::abs(v) > best_abs) {
          best_abs = std::abs(v);
          best_step = u;
        }
      }
    }
    Eigen::VectorXd y_new = y_opt + best_step;
    for (Eigen::Index i = 0; i < d; ++i) {
      y_new(i) = std::clamp(y_new(i), lb(i) - xbase(i), ub(i) - xbase(i));
    }
    const auto terms = detail::replacement_terms(inverse, ypts, y_new);
    if (!(std::abs(detail::replacement_denominator(inverse, terms, knew)) > 1e-300)) return false;
    const double f_new = eval(xbase + y_new);
    update(knew, y_new, f_new, terms);
    return true;
  };

  // Returns false when the final radius has been reached.
  auto reduce_rho = [&]() -> bool {
    if (rho <= rho_end) return false;
    delta = 0.5 * rho;
    const double ratio = rho / rho_end;
    if (ratio <= 16.0) {
      rho = rho_end;
    } else if (ratio <= 250.0) {
      rho = std::sqrt(ratio) * rho_end;
    } else {
      rho *= 0.1;
    }
    delta = std::max(delta, rho);
    return true;
  };

  auto shift_base = [&]() {
    const Eigen::VectorXd y_opt = ypts.row(kopt).transpose();
    gq += hess_vec(y_opt);
    fold_implicit();
    xbase += y_opt;
    ypts.rowwise() -= y_opt.transpose();
    inverse = detail::inverse_kkt(ypts);
  };

  while (true) {
    if (eval.reached_target()) return eval.finish(true, "target");
    if (eval.exhausted()) return eval.finish(false, "budget");

    Eigen::VectorXd y_opt = ypts.row(kopt).transpose();
    const Eigen::VectorXd gopt = gq + hess_vec(y_opt);
    Eigen::VectorXd lo = lb - xbase - y_opt;
    Eigen::VectorXd hi = ub - xbase - y_opt;
    const Eigen::VectorXd step = detail::trust_region_step(gopt, hess_vec, delta, lo, hi);
    const double dnorm = std::min(delta, step.norm());

    if (y_opt.squaredNorm() > 0.0 && step.squaredNorm() <= 1e-3 * y_opt.squaredNorm()) {
      shift_base();
      continue;
    }

    bool short_step = dnorm < 0.5 * rho;
    double ratio = -1.0;
    if (!short_step) {
      const double predicted = gopt.dot(step) + 0.5 * step.dot(hess_vec(step));
      if (!(predicted < 0.0)) {
        short_step = true;
      } else {
        const Eigen::VectorXd y_new = y_opt + step;
        const double f_old = fval(kopt);
        const double f_new = eval(xbase + y_new);
        ratio = (f_old - f_new) / -predicted;
        if (ratio <= 0.1) {
          delta = std::min(0.5 * delta, dnorm);
        } else if (ratio <= 0.7) {
          delta = std::max(0.5 * delta, dnorm);
        } else {
          delta = std::max(0.5 * delta, 2.0 * dnorm);
        }
        if (delta <= 1.5 * rho) delta = rho;

        const auto terms = detail::replacement_terms(inverse, ypts, y_new);
        Eigen::Index t = -1;
        double best_weight = 0.0;
        for (Eigen::Index k = 0; k < p; ++k) {
          if (k == kopt && f_new >= f_old) continue;
          const double dsq = (ypts.row(k) - ypts.row(kopt)).squaredNorm();
          const double scale = std::max(1.0, (dsq / (delta * delta)) * (dsq / (delta * delta)));
          const double weight = scale * std::abs(detail::replacement_denominator(inverse, terms, k));
          if (weight > best_weight) {
            best_weight = weight;
            t = k;
          }
        }
        if (t >= 0) update(t, y_new, f_new, terms);
        if (eval.reached_target()) return eval.finish(true, "target");
        if (ratio >= 0.1) continue;
      }
    }

    if (eval.exhausted()) return eval.finish(false, "budget");
    double dist_sq = 0.0;
    const Eigen::Index knew =
        farthest(std::max(4.0 * delta * delta, 100.0 * rho * rho), dist_sq);
    if (knew >= 0) {
      const double dist = std::sqrt(dist_sq);
      if (short_step) {
        delta = std::min(0.1 * delta, 0.5 * dist);
        if (delta <= 1.5 * rho) delta = rho;
      }
      const double adelt = std::max(std::min(0.1 * dist, delta), rho);
      if (geometry_step(knew, adelt)) continue;
    }
    if (!short_step && (ratio > 0.0 || std::max(delta, dnorm) > rho)) continue;

    const double improvement = f_at_last_rho - fval(kopt);
    if (!reduce_rho()) return eval.finish(true, "radius");
    if (config.cost_tolerance > 0.0 && improvement < config.cost_tolerance) {
      return eval.finish(true, "cost_tolerance");
    }
    f_at_last_rho = fval(kopt);
    shift_base();
  }
}

}  // namespace qonn
