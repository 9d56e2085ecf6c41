#include "smcf/discretization.hpp"

#include "smcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smcf {

std::string_view to_string(DomainKind k) noexcept {
  switch (k) {
    case DomainKind::Interval: return "interval";
    case DomainKind::Box: return "box";
    case DomainKind::EntireTruncation: return "entire-truncation";
  }
  return "unknown";
}

std::string_view to_string(BoundaryKind k) noexcept {
  switch (k) {
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::ExactTracking: return "exact-tracking";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(std::string_view s) {
  if (s == "interval") return DomainKind::Interval;
  if (s == "box") return DomainKind::Box;
  if (s == "entire-truncation") return DomainKind::EntireTruncation;
  throw ConfigError("unknown domain kind '" + std::string(s) + "'");
}

BoundaryKind boundary_kind_from_string(std::string_view s) {
  if (s == "neumann") return BoundaryKind::Neumann;
  if (s == "dirichlet") return BoundaryKind::Dirichlet;
  if (s == "exact-tracking") return BoundaryKind::ExactTracking;
  throw ConfigError("unknown boundary kind '" + std::string(s) + "'");
}

double DomainSpec::h_max() const {
  double r = 0.0;
  for (int a = 0; a < n(); ++a) r = std::max(r, h(a));
  return r;
}

double DomainSpec::h_min() const {
  double r = h(0);
  for (int a = 1; a < n(); ++a) r = std::min(r, h(a));
  return r;
}

void DomainSpec::validate() const {
  const int dim = n();
  if (dim < 1 || dim > kMaxBaseDim)
    throw DimensionError("domain dimension must be between 1 and 3, got " + std::to_string(dim));
  if (static_cast<int>(resolution.size()) != dim)
    throw DimensionError("domain resolution has " + std::to_string(resolution.size()) +
                         " entries for " + std::to_string(dim) + " axes");
  if (kind == DomainKind::Interval && dim != 1)
    throw DimensionError("an interval domain must be one-dimensional");
  for (int a = 0; a < dim; ++a) {
    if (!(bounds[a].second > bounds[a].first) || !std::isfinite(bounds[a].first) ||
        !std::isfinite(bounds[a].second))
      throw DimensionError("domain axis " + std::to_string(a) + " has empty or non-finite bounds");
    if (resolution[a] < 3)
      throw DimensionError("domain axis " + std::to_string(a) + " needs at least 3 cells");
  }
  if (h_max() > kMaxAspect * h_min()) {
    std::ostringstream os;
    os << "grid spacing aspect ratio " << h_max() / h_min() << " exceeds " << kMaxAspect;
    throw DimensionError(os.str());
  }
}

DomainSpec DomainSpec::interval(double lo, double hi, int cells, BoundaryKind b) {
  DomainSpec d;
  d.kind = DomainKind::Interval;
  d.bounds = {{lo, hi}};
  d.resolution = {cells};
  d.boundary = b;
  d.validate();
  return d;
}

DomainSpec DomainSpec::box(std::vector<std::pair<double, double>> bounds, std::vector<int> cells,
                           BoundaryKind b) {
  DomainSpec d;
  d.kind = DomainKind::Box;
  d.bounds = std::move(bounds);
  d.resolution = std::move(cells);
  d.boundary = b;
  d.validate();
  return d;
}

Grid::Grid(const DomainSpec& d) : n_(d.n()) {
  d.validate();
  size_ = 1;
  for (int a = n_ - 1; a >= 0; --a) {
    nodes_[a] = d.resolution[a] + 1;
    stride_[a] = size_;
    size_ *= static_cast<std::size_t>(nodes_[a]);
    h_[a] = d.h(a);
    lo_[a] = d.bounds[a].first;
  }
}

std::array<int, kMaxBaseDim> Grid::multi_index(std::size_t node) const noexcept {
  std::array<int, kMaxBaseDim> k{0, 0, 0};
  for (int a = 0; a < n_; ++a) {
    k[a] = static_cast<int>(node / stride_[a]);
    node %= stride_[a];
  }
  return k;
}

std::size_t Grid::flat(const std::array<int, kMaxBaseDim>& k) const noexcept {
  std::size_t idx = 0;
  for (int a = 0; a < n_; ++a) idx += static_cast<std::size_t>(k[a]) * stride_[a];
  return idx;
}

double Grid::coord(std::size_t node, int axis) const noexcept {
  const auto k = multi_index(node);
  return lo_[axis] + k[axis] * h_[axis];
}

std::array<double, kMaxBaseDim> Grid::coords(std::size_t node) const noexcept {
  const auto k = multi_index(node);
  std::array<double, kMaxBaseDim> x{0, 0, 0};
  for (int a = 0; a < n_; ++a) x[a] = lo_[a] + k[a] * h_[a];
  return x;
}

bool Grid::is_boundary(std::size_t node) const noexcept {
  const auto k = multi_index(node);
  for (int a = 0; a < n_; ++a)
    if (k[a] == 0 || k[a] == nodes_[a] - 1) return true;
  return false;
}

std::optional<std::size_t> Grid::node_at(std::span<const double> x) const {
  std::array<int, kMaxBaseDim> k{0, 0, 0};
  for (int a = 0; a < n_; ++a) {
    const double s = (x[a] - lo_[a]) / h_[a];
    const double r = std::round(s);
    if (std::abs(s - r) > 1e-9 || r < 0 || r > nodes_[a] - 1) return std::nullopt;
    k[a] = static_cast<int>(r);
  }
  return flat(k);
}

GraphState GraphState::zeros(const DomainSpec& d, int m, double t) {
  if (m < 1) throw DimensionError("codimension m must be >= 1");
  GraphState s;
  s.domain = d;
  s.m = m;
  s.t = t;
  s.u.assign(Grid(d).size() * static_cast<std::size_t>(m), 0.0);
  return s;
}

AmbientVector GraphState::position(std::size_t node) const {
  const Grid g(domain);
  const auto x = g.coords(node);
  AmbientVector p;
  p.spatial.assign(x.begin(), x.begin() + domain.n());
  const auto v = at(node);
  p.vertical.assign(v.begin(), v.end());
  return p;
}

void GraphState::validate() const {
  const Grid g(domain);
  if (m < 1) throw DimensionError("codimension m must be >= 1");
  const std::size_t expect = g.size() * static_cast<std::size_t>(m);
  if (u.size() != expect) {
    std::ostringstream os;
    os << "state array has " << u.size() << " values, expected " << expect << " (" << g.size()
       << " nodes x m=" << m << ")";
    throw DimensionError(os.str());
  }
  if (dirichlet_data && dirichlet_data->size() != expect)
    throw DimensionError("dirichlet data size does not match the state array");
}

Stencil::Stencil(const DomainSpec& d, int m)
    : grid_(d), m_(m), mirror_(d.boundary == BoundaryKind::Neumann) {}

double Stencil::first(const double* u, std::size_t idx, int axis, int k, int comp) const {
  const int N = grid_.nodes(axis);
  const std::size_t s = grid_.stride(axis) * m_;
  const std::size_t b = idx * m_ + comp;
  const double inv2h = 0.5 / grid_.h(axis);
  if (k > 0 && k < N - 1) return (u[b + s] - u[b - s]) * inv2h;
  if (mirror_) return 0.0;
  if (k == 0) return (-3.0 * u[b] + 4.0 * u[b + s] - u[b + 2 * s]) * inv2h;
  return (3.0 * u[b] - 4.0 * u[b - s] + u[b - 2 * s]) * inv2h;
}

double Stencil::second(const double* u, std::size_t idx, int axis, int k, int comp) const {
  const int N = grid_.nodes(axis);
  const std::size_t s = grid_.stride(axis) * m_;
  const std::size_t b = idx * m_ + comp;
  const double h = grid_.h(axis);
  const double inv_h2 = 1.0 / (h * h);
  if (k > 0 && k < N - 1) return (u[b + s] - 2.0 * u[b] + u[b - s]) * inv_h2;
  if (mirror_) {
    const double nb = (k == 0) ? u[b + s] : u[b - s];
    return 2.0 * (nb - u[b]) * inv_h2;
  }
  if (k == 0) return (2.0 * u[b] - 5.0 * u[b + s] + 4.0 * u[b + 2 * s] - u[b + 3 * s]) * inv_h2;
  return (2.0 * u[b] - 5.0 * u[b - s] + 4.0 * u[b - 2 * s] - u[b - 3 * s]) * inv_h2;
}

void Stencil::jet(std::span<const double> u, std::size_t node, std::span<double> du,
                  std::span<double> d2u) const {
  const int n = grid_.n();
  const int m = m_;
  const auto k = grid_.multi_index(node);
  const double* p = u.data();
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      du[i * m + a] = first(p, node, i, k[i], a);
      d2u[(i * n + i) * m + a] = second(p, node, i, k[i], a);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int N = grid_.nodes(i);
      const std::size_t s = grid_.stride(i);
      const double inv2h = 0.5 / grid_.h(i);
      for (int a = 0; a < m; ++a) {
        double v;
        if (k[i] > 0 && k[i] < N - 1) {
          v = (first(p, node + s, j, k[j], a) - first(p, node - s, j, k[j], a)) * inv2h;
        } else if (mirror_) {
          v = 0.0;
        } else if (k[i] == 0) {
          v = (-3.0 * first(p, node, j, k[j], a) + 4.0 * first(p, node + s, j, k[j], a) -
               first(p, node + 2 * s, j, k[j], a)) *
              inv2h;
        } else {
          v = (3.0 * first(p, node, j, k[j], a) - 4.0 * first(p, node - s, j, k[j], a) +
               first(p, node - 2 * s, j, k[j], a)) *
              inv2h;
        }
        d2u[(i * n + j) * m + a] = v;
        d2u[(j * n + i) * m + a] = v;
      }
    }
}

Jet derivatives(const GraphState& state, std::size_t node) {
  const int n = state.domain.n();
  const int m = state.m;
  const Stencil st(state.domain, m);
  std::vector<double> du(n * m), d2u(n * n * m);
  st.jet(state.u, node, du, d2u);
  Jet j(n, m);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      j.du(i, a) = du[i * m + a];
      for (int l = 0; l < n; ++l) j.d2u[a](i, l) = d2u[(i * n + l) * m + a];
    }
  return j;
}

double ExtendedArray::at(const std::array<int, kMaxBaseDim>& k, int comp) const {
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a) idx = idx * dims[a] + static_cast<std::size_t>(k[a] + 1);
  return data[idx * m + comp];
}

ExtendedArray neumann_ghost_fill(const GraphState& state) {
  if (state.domain.boundary != BoundaryKind::Neumann)
    throw PreconditionError("neumann_ghost_fill called on a domain with " +
                            std::string(to_string(state.domain.boundary)) + " boundary");
  const Grid g(state.domain);
  ExtendedArray ext;
  ext.n = g.n();
  ext.m = state.m;
  std::size_t total = 1;
  for (int a = 0; a < g.n(); ++a) {
    ext.dims[a] = g.nodes(a) + 2;
    total *= ext.dims[a];
  }
  ext.data.resize(total * state.m);
  for (std::size_t e = 0; e < total; ++e) {
    std::size_t rem = e;
    std::array<int, kMaxBaseDim> k{0, 0, 0};
    for (int a = g.n() - 1; a >= 0; --a) {
      int ka = static_cast<int>(rem % ext.dims[a]) - 1;
      rem /= ext.dims[a];
      const int N = g.nodes(a);
      if (ka < 0) ka = 1;
      if (ka > N - 1) ka = N - 2;
      k[a] = ka;
    }
    const auto src = state.at(g.flat(k));
    std::copy(src.begin(), src.end(), ext.data.begin() + e * state.m);
  }
  return ext;
}

GraphState dirichlet_apply(const GraphState& state) {
  if (!state.dirichlet_data) throw PreconditionError("dirichlet_apply: no boundary data attached");
  state.validate();
  GraphState out = state;
  const Grid g(state.domain);
  const auto& phi = *state.dirichlet_data;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!g.is_boundary(node)) continue;
    for (int a = 0; a < state.m; ++a) out.u[node * state.m + a] = phi[node * state.m + a];
  }
  return out;
}

namespace {

// 4-point Lagrange weights on nodes base..base+3 for coordinate s (in units of h).
void lagrange4(double s, int base, std::array<double, 4>& w) {
  const double x = s - base;
  w[0] = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
  w[1] = x * (x - 2.0) * (x - 3.0) / 2.0;
  w[2] = -x * (x - 1.0) * (x - 3.0) / 2.0;
  w[3] = x * (x - 1.0) * (x - 2.0) / 6.0;
}

}  // namespace

void sample_cubic(const GraphState& state, std::span<const double> x, std::span<double> out) {
  const Grid g(state.domain);
  const int n = g.n();
  std::array<int, kMaxBaseDim> base{0, 0, 0};
  std::array<std::array<double, 4>, kMaxBaseDim> w{};
  for (int a = 0; a < n; ++a) {
    const double s = (x[a] - g.lo(a)) / g.h(a);
    const int N = g.nodes(a);
    if (s < -1e-9 || s > (N - 1) + 1e-9) {
      std::ostringstream os;
      os << "sample_cubic: coordinate " << x[a] << " outside axis " << a << " of the domain";
      throw RangeError(os.str());
    }
    int b = static_cast<int>(std::floor(s)) - 1;
    b = std::clamp(b, 0, N - 4);
    base[a] = b;
    lagrange4(s, b, w[a]);
  }
  for (int c = 0; c < state.m; ++c) out[c] = 0.0;
  const int count = 1 << (2 * n);  // 4^n
  for (int e = 0; e < count; ++e) {
    std::array<int, kMaxBaseDim> k{0, 0, 0};
    double weight = 1.0;
    int rem = e;
    for (int a = 0; a < n; ++a) {
      const int off = rem & 3;
      rem >>= 2;
      k[a] = base[a] + off;
      weight *= w[a][off];
    }
    if (weight == 0.0) continue;
    const auto v = state.at(g.flat(k));
    for (int c = 0; c < state.m; ++c) out[c] += weight * v[c];
  }
}

void annulus_reflection_profile(const GraphState& u0, const ReflectionExtension& ext,
                                std::span<const double> x, std::span<double> out) {
  const int n = u0.domain.n();
  const int m = u0.m;
  const double R = ext.radius;
  const double L = ext.lambda;
  double r = 0.0;
  for (int a = 0; a < n; ++a) r += x[a] * x[a];
  r = std::sqrt(r);

  std::vector<double> origin(n, 0.0), centre(m);
  sample_cubic(u0, origin, centre);

  if (r >= 2.0 * R + 2.0 * L) {
    std::fill(out.begin(), out.begin() + m, 0.0);
    return;
  }
  std::vector<double> p(x.begin(), x.begin() + n);
  if (r > R + L) {
    const double rr = R + L - std::abs(R + L - r);
    for (int a = 0; a < n; ++a) p[a] = x[a] * rr / r;
  }
  sample_cubic(u0, p, out);
  for (int c = 0; c < m; ++c) out[c] -= centre[c];
}

GraphState annulus_reflection_extend(const GraphState& u0, const ReflectionExtension& ext) {
  if (!(ext.radius > 0.0) || !(ext.lambda > 0.0))
    throw PreconditionError("annulus_reflection_extend: radius and lambda must be positive");
  const int n = u0.domain.n();
  const int m = u0.m;
  const double R = ext.radius;
  const double Lam = ext.lambda;
  const double L = ext.half_width > 0.0 ? ext.half_width : 2.0 * R + 3.0 * Lam + 1.0;
  const double h = u0.domain.h(0);

  DomainSpec d;
  d.kind = DomainKind::EntireTruncation;
  d.boundary = BoundaryKind::Neumann;
  for (int a = 0; a < n; ++a) {
    const int cells = static_cast<int>(std::lround(2.0 * L / u0.domain.h(a)));
    d.bounds.push_back({-L, L});
    d.resolution.push_back(cells);
  }
  GraphState out = GraphState::zeros(d, m, u0.t);
  out.provenance = u0.provenance;
  const Grid g(d);

  std::vector<double> val(m);
  std::vector<double> radius(g.size());
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto x = g.coords(node);
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
    radius[node] = std::sqrt(r2);
    if (radius[node] >= 2.0 * R + 2.0 * Lam) continue;
    annulus_reflection_profile(u0, ext, std::span<const double>(x.data(), n), val);
    std::copy(val.begin(), val.end(), out.u.begin() + node * m);
  }

  // Gaussian smoothing restricted to the two seam bands.
  const double band = 0.25 * Lam;
  auto in_band = [&](double r) {
    return std::abs(r - (R + Lam)) <= band || std::abs(r - (2.0 * R + 2.0 * Lam)) <= band;
  };
  const double sigma_nodes = band / (2.0 * h);
  const int passes = std::clamp(static_cast<int>(std::ceil(sigma_nodes * sigma_nodes)), 1, 64);
  static constexpr std::array<double, 5> kw{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  std::vector<double> prev;
  for (int pass = 0; pass < passes; ++pass) {
    for (int axis = 0; axis < n; ++axis) {
      prev = out.u;
      const int N = g.nodes(axis);
      const std::size_t s = g.stride(axis);
      for (std::size_t node = 0; node < g.size(); ++node) {
        if (!in_band(radius[node])) continue;
        const int k = g.multi_index(node)[axis];
        for (int c = 0; c < m; ++c) {
          double acc = 0.0;
          for (int o = -2; o <= 2; ++o) {
            const int kk = std::clamp(k + o, 0, N - 1);
            const std::size_t nb = node + (static_cast<long>(kk) - k) * static_cast<long>(s);
            acc += kw[o + 2] * prev[nb * m + c];
          }
          out.u[node * m + c] = acc;
        }
      }
    }
  }
  for (std::size_t node = 0; node < g.size(); ++node)
    if (radius[node] >= 2.0 * R + 3.0 * Lam)
      for (int c = 0; c < m; ++c) out.u[node * m + c] = 0.0;

  // Reflection cannot steepen the data; a violation means corrupted input.
  const Stencil st(d, m);
  std::vector<double> du(n * m), d2u(n * n * m);
  for (std::size_t node = 0; node < g.size(); ++node) {
    st.jet(out.u, node, du, d2u);
    const auto im = inverse_metric(du, n, m);
    if (!(im.lambda_max < 1.0 - kSpacelikeGuard)) {
      std::ostringstream os;
      os << "annulus_reflection_extend: extension not spacelike at node " << node
         << " (lambda=" << im.lambda_max << ")";
      throw SpacelikeViolation(os.str(), im.lambda_max, static_cast<std::ptrdiff_t>(node));
    }
  }
  return out;
}

}  // namespace smcf
