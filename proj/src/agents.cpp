#include "ce/agents.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "ce/error.hpp"

namespace ce {

struct Agent::AffineSlot {
  std::once_flag once;
  AffineBuilder builder;
  std::optional<AffineMap> value;
};

Agent::Agent(std::string label, std::size_t dim, Map map)
    : label_(std::move(label)), dim_(dim), map_(std::move(map)) {}

Agent::Agent(std::string label, std::size_t dim, Map map, AffineMap affine)
    : Agent(std::move(label), dim, std::move(map)) {
  require(affine.linear.rows() == dim && affine.linear.cols() == dim && affine.offset.size() == dim,
          ErrorCode::DimensionMismatch, "affine part of " + label_);
  affine_ = std::make_shared<AffineSlot>();
  affine_->value = std::move(affine);
}

Agent::Agent(std::string label, std::size_t dim, Map map, AffineBuilder lazy_affine)
    : Agent(std::move(label), dim, std::move(map)) {
  affine_ = std::make_shared<AffineSlot>();
  affine_->builder = std::move(lazy_affine);
}

Vector Agent::operator()(const Vector& v) const {
  require(v.size() == dim_, ErrorCode::DimensionMismatch,
          label_ + " expects dimension " + std::to_string(dim_) + ", got " + std::to_string(v.size()));
  return map_(v);
}

bool Agent::has_affine_part() const noexcept { return affine_ != nullptr; }

const AffineMap& Agent::affine_part() const {
  require(affine_ != nullptr, ErrorCode::InvalidArgument, label_ + " has no affine part");
  std::call_once(affine_->once, [slot = affine_.get()] {
    if (!slot->value) slot->value = slot->builder();
  });
  return *affine_->value;
}

Matrix materialize(const Agent::Map& map, std::size_t n) {
  Matrix m(n, n);
  const Vector zero(n);
  const Vector base = map(zero);
  Vector e(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    m.set_column(j, map(e) - base);
    e[j] = 0.0;
  }
  return m;
}

Agent quadratic_prox_agent(const Matrix& a, const Vector& y, double sigma) {
  require(a.rows() == y.size(), ErrorCode::DimensionMismatch, "quadratic_prox_agent: A rows vs y");
  require(sigma > 0.0, ErrorCode::InvalidArgument, "quadratic_prox_agent: sigma must be positive");
  const std::size_t n = a.cols();
  const double s2 = sigma * sigma;
  const Matrix at = a.transpose();
  const Matrix system = Matrix::identity(n) + s2 * (at * a);
  auto lu = std::make_shared<const LuFactorization>(system);
  const Vector shift = s2 * (at * y);

  AffineMap affine{lu->inverse(), lu->solve(shift)};
  auto map = [lu, shift](const Vector& v) { return lu->solve(v + shift); };
  return Agent("quadratic_prox", n, std::move(map), std::move(affine));
}

Agent prox_quadratic_norm_agent(const Vector& c, double lambda, double sigma) {
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "prox_quadratic_norm_agent: lambda < 0");
  require(sigma > 0.0, ErrorCode::InvalidArgument, "prox_quadratic_norm_agent: sigma must be positive");
  const std::size_t n = c.size();
  const double s2l = sigma * sigma * lambda;
  const double scale = 1.0 / (1.0 + s2l);
  const Vector shift = s2l * c;
  auto map = [shift, scale](const Vector& v) { return scale * (v + shift); };
  Agent::AffineBuilder affine = [n, shift, scale] {
    return AffineMap{scale * Matrix::identity(n), scale * shift};
  };
  return Agent("prox_quadratic_norm", n, std::move(map), std::move(affine));
}

Agent toy_expanding_agent() {
  auto map = [](const Vector& v) {
    return Vector{1.1 * (v[0] + 0.2), 1.1 * (v[1] - 0.2 * std::sin(2.0 * v[1]))};
  };
  return Agent("toy_expanding", 2, std::move(map));
}

Matrix row_stochastic_matrix(std::size_t n, Rng& rng) {
  require(n >= 2, ErrorCode::InvalidArgument, "row_stochastic_matrix: n must be >= 2");
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = rng.next_uniform();
  for (std::size_t i = 0; i < n; ++i) {
    auto row = w.row(i);
    row[i] = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double x : row) sum += x;
    for (double& x : row) x /= sum;
  }
  return w;
}

Agent row_stochastic_agent(std::size_t n, Rng& rng) {
  Matrix w = row_stochastic_matrix(n, rng);
  auto shared = std::make_shared<const Matrix>(w);
  auto map = [shared](const Vector& v) { return *shared * v; };
  return Agent("row_stochastic", n, std::move(map), AffineMap{std::move(w), Vector(n)});
}

Agent blended_agent(const Matrix& w, double r) {
  require(w.is_square(), ErrorCode::DimensionMismatch, "blended_agent: W must be square");
  const std::size_t n = w.rows();
  auto shared = std::make_shared<const Matrix>(w);
  const double half = 0.5 * (1.0 - r);
  auto map = [shared, r, half](const Vector& v) {
    Vector out = *shared * v;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = r * out[i] + half * v[i];
    return out;
  };
  Matrix linear = r * w;
  for (std::size_t i = 0; i < n; ++i) linear(i, i) += half;
  return Agent("blended", n, std::move(map), AffineMap{std::move(linear), Vector(n)});
}

Vector gaussian_taps(double kernel_std) {
  require(kernel_std > 0.0, ErrorCode::InvalidArgument, "gaussian kernel std must be positive");
  const auto radius = static_cast<std::size_t>(std::max(1.0, std::ceil(4.0 * kernel_std)));
  Vector taps(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double d = static_cast<double>(k) - static_cast<double>(radius);
    taps[k] = std::exp(-d * d / (2.0 * kernel_std * kernel_std));
    sum += taps[k];
  }
  taps *= 1.0 / sum;
  return taps;
}

namespace {

// Half-sample symmetric extension: ... c b a | a b c ... | c b a ...
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - 1 - m;
  return static_cast<std::size_t>(m);
}

// Blur along one axis: `count` lines of `length` samples, consecutive samples
// `stride` apart, consecutive lines `line_step` apart.
void blur_axis(const Vector& taps, const Vector& in, Vector& out, std::size_t length,
               std::size_t count, std::size_t stride, std::size_t line_step) {
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  for (std::size_t line = 0; line < count; ++line) {
    const std::size_t base = line * line_step;
    for (std::size_t i = 0; i < length; ++i) {
      double s = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const std::size_t j = reflect_index(static_cast<std::ptrdiff_t>(i) + k, length);
        s += taps[static_cast<std::size_t>(k + radius)] * in[base + j * stride];
      }
      out[base + i * stride] = s;
    }
  }
}

constexpr std::size_t kMaxMaterializedPixels = 4096;

}  // namespace

Agent gaussian_denoiser_agent(std::size_t width, std::size_t height, double strength,
                              double kernel_std_per_strength) {
  require(width > 0 && height > 0, ErrorCode::DimensionMismatch, "gaussian_denoiser_agent: empty image");
  require(strength > 0.0 && kernel_std_per_strength > 0.0, ErrorCode::InvalidArgument,
          "gaussian_denoiser_agent: strength must be positive");
  const std::size_t n = width * height;
  auto taps = std::make_shared<const Vector>(gaussian_taps(kernel_std_per_strength * strength));
  Agent::Map map = [taps, width, height](const Vector& v) {
    Vector tmp(v.size());
    Vector out(v.size());
    blur_axis(*taps, v, tmp, width, height, 1, width);     // along rows
    blur_axis(*taps, tmp, out, height, width, width, 1);   // along columns
    return out;
  };
  const std::string label = "gaussian_denoiser_" + std::to_string(strength);
  if (n > kMaxMaterializedPixels) return Agent(label, n, std::move(map));
  Agent::AffineBuilder builder = [map, n] { return AffineMap{materialize(map, n), Vector(n)}; };
  return Agent(label, n, std::move(map), std::move(builder));
}

Agent data_fidelity_agent(const Vector& y, double sigma_eta, double sigma_prox) {
  require(sigma_eta > 0.0 && sigma_prox > 0.0, ErrorCode::InvalidArgument,
          "data_fidelity_agent: noise levels must be positive");
  const std::size_t n = y.size();
  const double s2 = sigma_prox * sigma_prox;
  const double e2 = sigma_eta * sigma_eta;
  const double data_weight = s2 / (s2 + e2);
  const double input_weight = e2 / (s2 + e2);
  const Vector shift = data_weight * y;
  auto map = [shift, input_weight](const Vector& v) {
    Vector out = shift;
    axpy(input_weight, v, out);
    return out;
  };
  Agent::AffineBuilder affine = [n, shift, input_weight] {
    return AffineMap{input_weight * Matrix::identity(n), shift};
  };
  return Agent("data_fidelity", n, std::move(map), std::move(affine));
}

}  // namespace ce
