#include "obsopt/prescriptive_nonparam.hpp"
#include "obsopt/error.hpp"
#include "obsopt/parallel.hpp"
#include "obsopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace obsopt {

PartialMeanCurve::PartialMeanCurve(const ObservationalDataset& data,
                                   KernelSpec kernel,
                                   double h,
                                   RewardSpec reward,
                                   DecisionSpace space,
                                   PartialMeanOptions options)
  : kernel_(kernel)
  , h_(h)
  , reward_(reward)
  , space_(std::move(space))
{
  k_ = data.covariates();
  if (k_ == 0)
    throw std::invalid_argument("partial-mean estimation needs at least one covariate");
  if (kernel_.dim != 1 + k_)
    throw std::invalid_argument("partial-mean kernel must have dimension 1 + k = " +
                                std::to_string(1 + k_) + ", got " +
                                std::to_string(kernel_.dim));
  kernel_.validate();
  if (!(h_ > 0.0) || !std::isfinite(h_))
    throw std::invalid_argument("partial-mean bandwidth must be positive");

  n_ = data.size();
  r_ = n_;
  if (!options.covariate_scale.empty()) {
    if (options.covariate_scale.size() != k_)
      throw std::invalid_argument("covariate_scale needs one entry per covariate");
    for (double s : options.covariate_scale)
      if (!(s > 0.0) || !std::isfinite(s))
        throw std::invalid_argument("covariate scales must be positive");
    scale_ = options.covariate_scale;
  } else {
    scale_.assign(k_, 1.0);
    if (options.standardize_covariates && n_ > 1) {
      for (std::size_t c = 0; c < k_; ++c) {
        const auto col = data.x().col(static_cast<Eigen::Index>(c));
        const double mean = col.mean();
        const double var =
          (col.array() - mean).square().sum() / static_cast<double>(n_ - 1);
        if (var > 0.0)
          scale_[c] = std::sqrt(var);
      }
    }
  }

  z_.resize(r_);
  y_.resize(r_);
  t_.resize(r_);
  x_.resize(r_ * k_);
  for (std::size_t j = 0; j < r_; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    z_[j] = data.z()(row);
    y_[j] = data.y()(row);
    t_[j] = reward_(z_[j]) * y_[j];
    for (std::size_t c = 0; c < k_; ++c)
      x_[j * k_ + c] = data.x()(row, static_cast<Eigen::Index>(c)) / scale_[c];
  }

  select_outer(options);
  build_bands();
  build_weights(nullptr, {});
  evaluate_grid(options.threads);
}

PartialMeanCurve::PartialMeanCurve(const PartialMeanCurve& parent,
                                   std::span<const std::size_t> index,
                                   PartialMeanOptions options)
  : kernel_(parent.kernel_)
  , h_(parent.h_)
  , reward_(parent.reward_)
  , space_(parent.space_)
  , k_(parent.k_)
  , scale_(parent.scale_)
{
  if (index.empty())
    throw std::invalid_argument("resample must contain at least one row");
  std::vector<std::size_t> hits(parent.r_, 0);
  for (std::size_t src : index) {
    if (src >= parent.r_)
      throw std::out_of_range("resample index " + std::to_string(src) + " out of range");
    ++hits[src];
  }
  std::vector<std::size_t> source;
  for (std::size_t src = 0; src < parent.r_; ++src) {
    if (hits[src] == 0)
      continue;
    source.push_back(src);
    count_.push_back(static_cast<double>(hits[src]) * parent.row_weight(src));
  }
  r_ = source.size();
  n_ = 0;
  for (double c : count_)
    n_ += static_cast<std::size_t>(c);

  z_.resize(r_);
  y_.resize(r_);
  t_.resize(r_);
  x_.resize(r_ * k_);
  for (std::size_t j = 0; j < r_; ++j) {
    const std::size_t src = source[j];
    z_[j] = parent.z_[src];
    y_[j] = parent.y_[src];
    t_[j] = parent.t_[src];
    for (std::size_t c = 0; c < k_; ++c)
      x_[j * k_ + c] = parent.x_[src * k_ + c];
  }
  select_outer(options);
  build_bands();
  build_weights(&parent, source);
  evaluate_grid(options.threads);
}

void PartialMeanCurve::select_outer(const PartialMeanOptions& options)
{
  if (options.row_cap > 0 && r_ > options.row_cap) {
    // partial Fisher-Yates: the first row_cap slots become a uniform subset
    std::vector<std::size_t> perm(r_);
    std::iota(perm.begin(), perm.end(), std::size_t{ 0 });
    Rng rng(options.subsample_seed);
    for (std::size_t s = 0; s < options.row_cap; ++s) {
      const auto pick = s + static_cast<std::size_t>(rng.index(r_ - s));
      std::swap(perm[s], perm[pick]);
    }
    outer_.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(options.row_cap));
    std::sort(outer_.begin(), outer_.end());
  } else {
    outer_.resize(r_);
    std::iota(outer_.begin(), outer_.end(), std::size_t{ 0 });
  }
  m_ = outer_.size();
  outer_weight_ = 0.0;
  for (std::size_t row : outer_)
    outer_weight_ += row_weight(row);
}

void PartialMeanCurve::build_bands()
{
  // order the outer rows by the first scaled covariate
  at_.resize(m_);
  std::iota(at_.begin(), at_.end(), std::size_t{ 0 });
  std::stable_sort(at_.begin(), at_.end(), [&](std::size_t a, std::size_t b) {
    return x_[outer_[a] * k_] < x_[outer_[b] * k_];
  });
  pos_.resize(m_);
  std::vector<double> key(m_);
  for (std::size_t p = 0; p < m_; ++p) {
    pos_[at_[p]] = p;
    key[p] = x_[outer_[at_[p]] * k_];
  }

  // the first factor vanishes exactly outside a contiguous run of positions
  // because |key[p] - x| / h is monotone on each side of x
  const auto family = kernel_.family;
  lo_.resize(r_);
  len_.resize(r_);
  off_.resize(r_);
  std::size_t total = 0;
  for (std::size_t j = 0; j < r_; ++j) {
    const double x = x_[j * k_];
    const auto first = std::partition_point(key.begin(), key.end(), [&](double v) {
      return v < x && kernel_vanishes(family, (v - x) / h_);
    });
    const auto last = std::partition_point(first, key.end(), [&](double v) {
      return !(v > x && kernel_vanishes(family, (v - x) / h_));
    });
    lo_[j] = static_cast<std::size_t>(first - key.begin());
    len_[j] = static_cast<std::size_t>(last - first);
    off_[j] = total;
    total += len_[j];
  }
  w_.resize(total);
}

void PartialMeanCurve::build_weights(const PartialMeanCurve* parent,
                                     std::span<const std::size_t> source)
{
  if (parent && parent->m_ == parent->r_) {
    // stored rows of a resample are rows of the parent, so are their kernel
    // factors, and a child band lies inside the parent band of the same row
    for (std::size_t j = 0; j < r_; ++j) {
      const std::size_t pj = source[j];
      const double* src = &parent->w_[parent->off_[pj]];
      const std::size_t plo = parent->lo_[pj];
      double* dst = &w_[off_[j]];
      for (std::size_t p = 0; p < len_[j]; ++p) {
        const std::size_t prow = source[outer_[at_[lo_[j] + p]]];
        dst[p] = src[parent->pos_[prow] - plo];
      }
    }
    return;
  }

  // W(i, j) = k(u_1) * k(u_2) * ... with u_c = (X_ic - X_jc) / h, multiplied
  // left to right so that k(u_0) * W(i, j) equals kernel_eval bit for bit
  for (std::size_t j = 0; j < r_; ++j) {
    const double* xj = &x_[j * k_];
    double* dst = &w_[off_[j]];
    for (std::size_t p = 0; p < len_[j]; ++p) {
      const double* xi = &x_[outer_[at_[lo_[j] + p]] * k_];
      double prod = kernel_factor(kernel_.family, (xi[0] - xj[0]) / h_);
      for (std::size_t c = 1; c < k_; ++c)
        prod *= kernel_factor(kernel_.family, (xi[c] - xj[c]) / h_);
      dst[p] = prod;
    }
  }
}

void PartialMeanCurve::evaluate_grid(std::size_t threads)
{
  const auto& grid = space_.grid();
  values_.assign(grid.size(), 0.0);
  parallel_for(grid.size(), threads, [&](std::size_t node) {
    std::vector<double> num, den;
    double v;
    try {
      v = evaluate(grid[node], num, den);
    } catch (const EmptyNeighborhoodError& e) {
      throw EmptyNeighborhoodError(std::string(e.what()) + " (grid node " +
                                     std::to_string(node) + ")",
                                   e.index());
    }
    if (!std::isfinite(v))
      throw DataError("partial-mean curve is not finite at grid node " +
                      std::to_string(node) + " (z = " + format_number(grid[node]) + ")");
    values_[node] = v;
  });
}

double PartialMeanCurve::evaluate(double z,
                                  std::vector<double>& num,
                                  std::vector<double>& den) const
{
  num.assign(m_, 0.0);
  den.assign(m_, 0.0);
  const auto family = kernel_.family;
  const double h = h_;
  const bool weighted = !count_.empty();
  double* nu = num.data();
  double* de = den.data();
  for (std::size_t j = 0; j < r_; ++j) {
    double a = kernel_factor(family, (z - z_[j]) / h);
    if (a == 0.0)
      continue;
    if (weighted)
      a *= count_[j];
    const double t = t_[j];
    const double* col = w_.data() + off_[j];
    double* nj = nu + lo_[j];
    double* dj = de + lo_[j];
    const std::size_t len = len_[j];
    for (std::size_t p = 0; p < len; ++p) {
      const double w = a * col[p];
      nj[p] += w * t;
      dj[p] += w;
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    const std::size_t p = pos_[i];
    const double ratio = std::abs(den[p]) < std::numeric_limits<double>::min()
                           ? rescue_row(z, i)
                           : num[p] / den[p];
    sum += weighted ? count_[outer_[i]] * ratio : ratio;
  }
  return sum / (weighted ? outer_weight_ : static_cast<double>(m_));
}

double PartialMeanCurve::rescue_row(double z, std::size_t i) const
{
  const std::size_t row = outer_[i];
  auto empty = [&] {
    return EmptyNeighborhoodError("empty neighborhood: all kernel weights vanish for row " +
                                    std::to_string(row) + " at z = " + format_number(z),
                                  row);
  };
  if (!has_gaussian_envelope(kernel_.family)) {
    // compact support: recompute directly, a zero denominator is fatal
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < r_; ++j) {
      const double w = kernel_factor(kernel_.family, (z - z_[j]) / h_) *
                       covariate_weight(i, j) * row_weight(j);
      num += w * t_[j];
      den += w;
    }
    if (den == 0.0)
      throw empty();
    return num / den;
  }

  // every weight underflowed; the ratio is unchanged by a common factor, so
  // pull the largest gaussian envelope out before exponentiating
  std::vector<double> expo(r_);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < r_; ++j) {
    const double u0 = (z - z_[j]) / h_;
    double s = u0 * u0;
    for (std::size_t c = 0; c < k_; ++c) {
      const double u = (x_[row * k_ + c] - x_[j * k_ + c]) / h_;
      s += u * u;
    }
    expo[j] = -0.5 * s;
    top = std::max(top, expo[j]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < r_; ++j) {
    double w = std::exp(expo[j] - top);
    if (w == 0.0)
      continue;
    w *= kernel_polynomial(kernel_.family, (z - z_[j]) / h_);
    for (std::size_t c = 0; c < k_; ++c)
      w *= kernel_polynomial(kernel_.family,
                             (x_[row * k_ + c] - x_[j * k_ + c]) / h_);
    w *= row_weight(j);
    num += w * t_[j];
    den += w;
  }
  if (den == 0.0)
    throw empty();
  return num / den;
}

double PartialMeanCurve::operator()(double z) const
{
  if (!std::isfinite(z))
    throw std::invalid_argument("partial-mean query must be finite");
  std::vector<double> num, den;
  return evaluate(z, num, den);
}

double partial_mean_eval(const PartialMeanCurve& curve, double z)
{
  return curve(z);
}

Optimum prescriptive_nonparam_decision(const PartialMeanCurve& curve)
{
  return optimize_on_grid(curve.grid_values(), curve.space());
}

AsymptoticDiagnostics asymptotic_constants(const KernelSpec& kernel,
                                           const PartialMeanCurve* curve,
                                           double z)
{
  kernel.validate();
  const auto mi = marginal_integrals(kernel.family);
  AsymptoticDiagnostics out;
  out.kappa = mi.square / (mi.mass * mi.mass);
  out.kappa_prime = mi.derivative_square / (mi.mass * mi.mass);
  if (curve == nullptr)
    return out;

  const auto& zs = curve->decisions();
  const auto& ys = curve->outcomes();
  const std::size_t n = curve->stored_rows();
  const std::size_t m = curve->outer_rows();
  const double h = curve->h();

  constexpr double min_effective_rows = 2.0;
  std::vector<double> a(n);
  for (std::size_t j = 0; j < n; ++j)
    a[j] = kernel_factor(curve->kernel().family, (z - zs[j]) / h);

  double acc = 0.0;
  std::size_t used = 0;
  std::vector<double> w(n), wx(n);
  for (std::size_t i = 0; i < m; ++i) {
    double top = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      wx[j] = curve->covariate_weight(i, j) * curve->row_weight(j);
      w[j] = a[j] * wx[j];
      top = std::max(top, std::abs(w[j]));
    }
    if (!(top > 0.0))
      continue;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, sx = 0.0, u0 = 0.0, uq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      s0 += w[j];
      s1 += w[j] * ys[j];
      s2 += w[j] * ys[j] * ys[j];
      sx += wx[j];
      // Kish effective count on weights scaled by the largest one
      const double u = w[j] / top;
      u0 += u;
      uq += u * u / curve->row_weight(j);
    }
    // a neighborhood of a single record carries no variance information
    if (!(s0 > 0.0) || !(sx > 0.0) || !(u0 * u0 >= min_effective_rows * uq))
      continue;
    const double mean = s1 / s0;
    const double var = std::max(0.0, s2 / s0 - mean * mean);
    const double density = s0 / (h * mi.mass * sx);
    if (!(density > 0.0) || !std::isfinite(density))
      continue;
    acc += var / density;
    ++used;
  }
  if (used > 0) {
    const double r = curve->reward()(z);
    out.eta_hat = r * r * acc / static_cast<double>(used);
  }

  const auto& space = curve->space();
  if (out.eta_hat && space.is_interval() && space.size() >= 2) {
    const double step = (space.hi() - space.lo()) / static_cast<double>(space.size() - 1);
    const double second =
      ((*curve)(z + step) - 2.0 * (*curve)(z) + (*curve)(z - step)) / (step * step);
    if (second < 0.0 && std::isfinite(second))
      out.gamma_hat = -*out.eta_hat * out.kappa_prime / (2.0 * second);
  }
  return out;
}

} // namespace obsopt
