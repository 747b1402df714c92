#include "sgiif/sparse_space.hpp"

#include <array>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace sgiif
{
namespace
{
// Enumerates all integer vectors v with 0 <= v_m < extent[m] in
// lexicographic order (dimension 0 most significant).
template<typename Fn>
void for_each_tuple(std::vector<int> const &extent, Fn &&fn)
{
  int const d = static_cast<int>(extent.size());
  for (int e : extent)
  {
    if (e <= 0)
    {
      return;
    }
  }
  std::vector<int> v(d, 0);
  while (true)
  {
    fn(v);
    int m = d - 1;
    while (m >= 0)
    {
      if (++v[m] < extent[m])
      {
        break;
      }
      v[m] = 0;
      --m;
    }
    if (m < 0)
    {
      return;
    }
  }
}

// Mode-m product of a row-major tensor with the given extents.
void mode_product(Matrix const &op, std::span<int const> extents, int m,
                  double const *in, double *out)
{
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < m; ++i)
  {
    outer *= extents[i];
  }
  for (std::size_t i = m + 1; i < extents.size(); ++i)
  {
    inner *= extents[i];
  }
  int const cols = static_cast<int>(op.cols());
  int const rows = static_cast<int>(op.rows());
  for (std::int64_t o = 0; o < outer; ++o)
  {
    double const *src = in + o * cols * inner;
    double *dst       = out + o * rows * inner;
    for (int r = 0; r < rows; ++r)
    {
      double *drow = dst + r * inner;
      std::fill(drow, drow + inner, 0.0);
      for (int c = 0; c < cols; ++c)
      {
        double const a    = op(r, c);
        double const *col = src + c * inner;
        for (std::int64_t i = 0; i < inner; ++i)
        {
          drow[i] += a * col[i];
        }
      }
    }
  }
}

std::int64_t ipow(std::int64_t base, int exp)
{
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i)
  {
    r *= base;
  }
  return r;
}

// Transforms every line along each dimension of a full array. `skip` decides
// from the flat indices of the other dimensions whether a line can be left
// alone (known zero, or not needed downstream).
template<typename LineFn, typename SkipFn>
void transform_lines(std::span<double> data, int dims, int n1d, int m, LineFn &&line_fn,
                     SkipFn &&skip)
{
  std::int64_t const stride = ipow(n1d, dims - 1 - m);
  std::int64_t const outer  = ipow(n1d, m);
  std::vector<double> line(n1d);
  std::vector<int> fixed(dims, 0);
  for (std::int64_t o = 0; o < outer; ++o)
  {
    for (std::int64_t in = 0; in < stride; ++in)
    {
      // decode the fixed indices of the other dimensions
      std::int64_t rest = o;
      for (int i = m - 1; i >= 0; --i)
      {
        fixed[i] = static_cast<int>(rest % n1d);
        rest /= n1d;
      }
      rest = in;
      for (int i = dims - 1; i > m; --i)
      {
        fixed[i] = static_cast<int>(rest % n1d);
        rest /= n1d;
      }
      if (skip(fixed))
      {
        continue;
      }
      std::int64_t const base = o * n1d * stride + in;
      for (int i = 0; i < n1d; ++i)
      {
        line[i] = data[base + i * stride];
      }
      line_fn(std::span<double>(line));
      for (int i = 0; i < n1d; ++i)
      {
        data[base + i * stride] = line[i];
      }
    }
  }
}
} // namespace

grid_kind parse_grid_kind(std::string const &name)
{
  if (name == "sparse")
  {
    return grid_kind::sparse;
  }
  if (name == "full")
  {
    return grid_kind::full;
  }
  throw validation_error("unknown grid kind '" + name + "' (expected sparse or full)");
}

std::string to_string(grid_kind kind) { return kind == grid_kind::sparse ? "sparse" : "full"; }

std::int64_t dof_map::count(int dims, int k_poly, int max_level, grid_kind kind)
{
  std::int64_t total = 0;
  std::vector<int> extent(dims, max_level + 1);
  for_each_tuple(extent, [&](std::vector<int> const &l) {
    int const sum = std::accumulate(l.begin(), l.end(), 0);
    if (kind == grid_kind::sparse && sum > max_level)
    {
      return;
    }
    std::int64_t c = ipow(k_poly + 1, dims);
    for (int lm : l)
    {
      c *= translations(lm);
    }
    total += c;
  });
  return total;
}

dof_map::dof_map(int dims, int k_poly, int max_level, grid_kind kind, std::int64_t max_dofs)
    : dims_(dims), k_poly_(k_poly), max_level_(max_level), kind_(kind)
{
  expect(dims >= 1 && dims <= 6, "dof_map: dimension must be in 1..6");
  expect(max_level >= 0 && max_level <= 20, "dof_map: level must be in 0..20");
  expect(k_poly >= 0 && k_poly <= 4, "dof_map: k_poly must be in 0..4");
  std::int64_t const expected = count(dims, k_poly, max_level, kind);
  if (expected > max_dofs)
  {
    throw validation_error("dof_map: " + std::to_string(expected) +
                           " degrees of freedom exceed the configured maximum");
  }
  basis_     = std::make_shared<hierarchical_basis const>(basis_config{k_poly, max_level});
  int const modes = k_poly + 1;
  int const n1d   = basis_->size();
  full_size_      = ipow(n1d, dims);

  // level vectors ordered by (|l|_1, l)
  std::vector<std::vector<int>> levels;
  for_each_tuple(std::vector<int>(dims, max_level + 1), [&](std::vector<int> const &l) {
    if (admissible(l))
    {
      levels.push_back(l);
    }
  });
  std::stable_sort(levels.begin(), levels.end(), [](auto const &a, auto const &b) {
    int const sa = std::accumulate(a.begin(), a.end(), 0);
    int const sb = std::accumulate(b.begin(), b.end(), 0);
    if (sa != sb)
    {
      return sa < sb;
    }
    return a < b;
  });

  flat_.reserve(expected * dims);
  full_offset_.reserve(expected);
  lookup_.reserve(expected);
  std::vector<int> trans_extent(dims), flat(dims);
  std::vector<int> const poly_extent(dims, modes);
  for (auto const &l : levels)
  {
    for (int m = 0; m < dims; ++m)
    {
      trans_extent[m] = static_cast<int>(translations(l[m]));
    }
    for_each_tuple(trans_extent, [&](std::vector<int> const &j) {
      for_each_tuple(poly_extent, [&](std::vector<int> const &p) {
        std::int64_t offset = 0;
        for (int m = 0; m < dims; ++m)
        {
          flat[m] = hierarchical_basis::flat_index({l[m], j[m], p[m]}, modes);
          offset  = offset * n1d + flat[m];
        }
        lookup_.emplace(offset, static_cast<std::int64_t>(full_offset_.size()));
        full_offset_.push_back(offset);
        flat_.insert(flat_.end(), flat.begin(), flat.end());
      });
    });
  }
}

bool dof_map::admissible(std::span<int const> levels) const
{
  int sum = 0, mx = 0;
  for (int l : levels)
  {
    sum += l;
    mx = std::max(mx, l);
  }
  return kind_ == grid_kind::sparse ? sum <= max_level_ : mx <= max_level_;
}

std::int64_t dof_map::key(std::span<int const> flat) const
{
  std::int64_t offset = 0;
  for (int a : flat)
  {
    offset = offset * line_size() + a;
  }
  return offset;
}

std::int64_t dof_map::find(std::span<int const> flat) const
{
  auto const it = lookup_.find(key(flat));
  return it == lookup_.end() ? -1 : it->second;
}

std::int64_t dof_map::find(hier_index const &idx) const
{
  std::vector<int> flat(dims_);
  for (int m = 0; m < dims_; ++m)
  {
    int const level = idx.level[m];
    if (level < 0 || level > max_level_ || idx.poly[m] < 0 || idx.poly[m] > k_poly_ ||
        idx.trans[m] < 0 || idx.trans[m] >= translations(level))
    {
      return -1;
    }
    flat[m] = hierarchical_basis::flat_index({level, idx.trans[m], idx.poly[m]}, k_poly_ + 1);
  }
  return find(std::span<int const>(flat));
}

hier_index dof_map::at(std::int64_t i) const
{
  hier_index h;
  for (int m = 0; m < dims_; ++m)
  {
    auto const w = basis_->unflatten(index_1d(i, m));
    h.level.push_back(w.level);
    h.trans.push_back(w.trans);
    h.poly.push_back(w.poly);
  }
  return h;
}

void check_full_grid_budget(int dims, int k_poly, int max_level)
{
  double const values = std::pow((k_poly + 1) * std::ldexp(1.0, max_level), dims);
  if (values > 1e8)
  {
    throw validation_error("full-grid work needs " + std::to_string(values) +
                           " values, above the 1e8 budget");
  }
}

void forward_full(std::span<double> data, int dims, hierarchical_basis const &basis)
{
  int const n1d = basis.size();
  for (int m = 0; m < dims; ++m)
  {
    transform_lines(
        data, dims, n1d, m, [&](std::span<double> line) { basis.forward(line); },
        [](std::vector<int> const &) { return false; });
  }
}

void inverse_full(std::span<double> data, int dims, hierarchical_basis const &basis)
{
  int const n1d = basis.size();
  for (int m = 0; m < dims; ++m)
  {
    transform_lines(
        data, dims, n1d, m, [&](std::span<double> line) { basis.inverse(line); },
        [](std::vector<int> const &) { return false; });
  }
}

full_grid_field to_fullgrid(std::span<double const> c, dof_map const &dofs)
{
  expect(static_cast<std::int64_t>(c.size()) == dofs.size(), "to_fullgrid: size mismatch");
  check_full_grid_budget(dofs.dims(), dofs.k_poly(), dofs.max_level());
  full_grid_field g;
  g.dims      = dofs.dims();
  g.k_poly    = dofs.k_poly();
  g.max_level = dofs.max_level();
  g.data.assign(dofs.full_size(), 0.0);
  for (std::int64_t i = 0; i < dofs.size(); ++i)
  {
    g.data[dofs.full_offset(i)] = c[i];
  }
  auto const &basis = dofs.basis();
  int const n1d     = basis.size();
  int const d       = dofs.dims();
  bool const sparse = dofs.kind() == grid_kind::sparse;
  int const N       = dofs.max_level();
  for (int m = 0; m < d; ++m)
  {
    // dimensions after m are still hierarchical: the line is zero unless
    // their levels fit the truncation
    transform_lines(
        g.data, d, n1d, m, [&](std::span<double> line) { basis.inverse(line); },
        [&](std::vector<int> const &fixed) {
          if (!sparse)
          {
            return false;
          }
          int sum = 0;
          for (int i = m + 1; i < d; ++i)
          {
            sum += basis.level_of(fixed[i]);
          }
          return sum > N;
        });
  }
  return g;
}

Vector from_fullgrid(full_grid_field const &g, dof_map const &dofs)
{
  expect(g.dims == dofs.dims() && g.k_poly == dofs.k_poly() && g.max_level == dofs.max_level() &&
             static_cast<std::int64_t>(g.data.size()) == dofs.full_size(),
         "from_fullgrid: size mismatch");
  std::vector<double> data = g.data;
  auto const &basis        = dofs.basis();
  int const n1d            = basis.size();
  int const d              = dofs.dims();
  bool const sparse        = dofs.kind() == grid_kind::sparse;
  int const N              = dofs.max_level();
  for (int m = 0; m < d; ++m)
  {
    // dimensions before m are hierarchical already; lines whose levels exceed
    // the truncation are never read back
    transform_lines(
        data, d, n1d, m, [&](std::span<double> line) { basis.forward(line); },
        [&](std::vector<int> const &fixed) {
          if (!sparse)
          {
            return false;
          }
          int sum = 0;
          for (int i = 0; i < m; ++i)
          {
            sum += basis.level_of(fixed[i]);
          }
          return sum > N;
        });
  }
  Vector c(dofs.size());
  for (std::int64_t i = 0; i < dofs.size(); ++i)
  {
    c(i) = data[dofs.full_offset(i)];
  }
  return c;
}

double full_grid_field::eval(std::span<double const> x) const
{
  expect(static_cast<int>(x.size()) == dims, "full_grid_field::eval: dimension mismatch");
  int const modes  = k_poly + 1;
  int const cells  = static_cast<int>(pow2(max_level));
  double const h   = 1.0 / cells;
  int const n1d    = modes * cells;
  std::vector<int> cell(dims);
  std::vector<double> s(dims);
  for (int m = 0; m < dims; ++m)
  {
    if (!(x[m] >= 0.0 && x[m] <= 1.0))
    {
      throw std::domain_error("full_grid_field::eval: point outside [0,1]^d");
    }
    int c   = static_cast<int>(std::ceil(x[m] * cells)) - 1;
    c       = std::clamp(c, 0, cells - 1);
    cell[m] = c;
    s[m]    = x[m] * cells - c;
  }
  std::vector<double> phi(dims * modes);
  for (int m = 0; m < dims; ++m)
  {
    for (int p = 0; p < modes; ++p)
    {
      phi[m * modes + p] = local_legendre(p, s[m], h);
    }
  }
  double value = 0.0;
  for_each_tuple(std::vector<int>(dims, modes), [&](std::vector<int> const &p) {
    std::int64_t offset = 0;
    double w            = 1.0;
    for (int m = 0; m < dims; ++m)
    {
      offset = offset * n1d + cell[m] * modes + p[m];
      w *= phi[m * modes + p[m]];
    }
    value += w * data[offset];
  });
  return value;
}

void cell_from_flat(std::int64_t flat, int dims, int cells_per_dim, std::span<int> cell)
{
  for (int m = dims - 1; m >= 0; --m)
  {
    cell[m] = static_cast<int>(flat % cells_per_dim);
    flat /= cells_per_dim;
  }
}

cell_quadrature::cell_quadrature(int dims, int k_poly, int max_level, int points)
    : dims_(dims), modes_(k_poly + 1), points_(points),
      cells_(static_cast<int>(pow2(max_level))), width_(std::ldexp(1.0, -max_level)),
      points_per_cell_(ipow(points, dims)), modes_per_cell_(ipow(k_poly + 1, dims)),
      rule_(gauss_rule(points))
{
  eval_.resize(points_, modes_);
  project_.resize(modes_, points_);
  double const sqrt_h = std::sqrt(width_);
  for (int i = 0; i < points_; ++i)
  {
    for (int p = 0; p < modes_; ++p)
    {
      double const phi = shifted_legendre(p, rule_.nodes[i]);
      eval_(i, p)      = phi / sqrt_h;
      project_(p, i)   = rule_.weights[i] * phi * sqrt_h;
    }
  }
  std::int64_t const n1d = static_cast<std::int64_t>(modes_) * cells_;
  strides_.assign(dims_, 1);
  for (int m = dims_ - 2; m >= 0; --m)
  {
    strides_[m] = strides_[m + 1] * n1d;
  }
  local_offsets_.resize(modes_per_cell_);
  for (std::int64_t b = 0; b < modes_per_cell_; ++b)
  {
    std::int64_t rest = b, offset = 0;
    for (int m = dims_ - 1; m >= 0; --m)
    {
      offset += (rest % modes_) * strides_[m];
      rest /= modes_;
    }
    local_offsets_[b] = offset;
  }
  // small cells: one dense Kronecker product is faster than d mode products
  if (points_per_cell_ * modes_per_cell_ <= 4096)
  {
    eval_kron_    = eval_;
    project_kron_ = project_;
    for (int m = 1; m < dims_; ++m)
    {
      Matrix e(eval_kron_.rows() * points_, eval_kron_.cols() * modes_);
      Matrix p(project_kron_.rows() * modes_, project_kron_.cols() * points_);
      for (Eigen::Index i = 0; i < eval_kron_.rows(); ++i)
      {
        for (Eigen::Index j = 0; j < eval_kron_.cols(); ++j)
        {
          e.block(i * points_, j * modes_, points_, modes_) = eval_kron_(i, j) * eval_;
        }
      }
      for (Eigen::Index i = 0; i < project_kron_.rows(); ++i)
      {
        for (Eigen::Index j = 0; j < project_kron_.cols(); ++j)
        {
          p.block(i * modes_, j * points_, modes_, points_) = project_kron_(i, j) * project_;
        }
      }
      eval_kron_    = std::move(e);
      project_kron_ = std::move(p);
    }
  }
}

namespace
{
// Applies `op` along every dimension. Intermediates alternate between the two
// halves of `work`; only the last product writes `out`.
void apply_each_dim(Matrix const &op, int dims, double const *in, double *out,
                    std::span<double> work)
{
  std::array<int, 8> storage{};
  std::span<int> extents(storage.data(), dims);
  std::fill(extents.begin(), extents.end(), static_cast<int>(op.cols()));
  std::size_t const half = work.size() / 2;
  double const *src      = in;
  for (int m = 0; m < dims; ++m)
  {
    double *dst = (m + 1 == dims) ? out : work.data() + (m % 2) * half;
    mode_product(op, extents, m, src, dst);
    extents[m] = static_cast<int>(op.rows());
    src        = dst;
  }
}
} // namespace

void cell_quadrature::to_points(std::span<double const> coeffs, std::span<double> values,
                                std::span<double> work) const
{
  if (eval_kron_.size() > 0)
  {
    Eigen::Map<Vector>(values.data(), points_per_cell_).noalias() =
        eval_kron_ * Eigen::Map<Vector const>(coeffs.data(), modes_per_cell_);
    return;
  }
  apply_each_dim(eval_, dims_, coeffs.data(), values.data(), work);
}

void cell_quadrature::to_modes(std::span<double const> values, std::span<double> coeffs,
                               std::span<double> work) const
{
  if (project_kron_.size() > 0)
  {
    Eigen::Map<Vector>(coeffs.data(), modes_per_cell_).noalias() =
        project_kron_ * Eigen::Map<Vector const>(values.data(), points_per_cell_);
    return;
  }
  apply_each_dim(project_, dims_, values.data(), coeffs.data(), work);
}

void cell_quadrature::point_coords(std::span<int const> cell, std::int64_t pt,
                                   std::span<double> x) const
{
  for (int m = dims_ - 1; m >= 0; --m)
  {
    int const i = static_cast<int>(pt % points_);
    pt /= points_;
    x[m] = (cell[m] + rule_.nodes[i]) * width_;
  }
}

std::int64_t cell_quadrature::cell_base(std::span<int const> cell) const
{
  std::int64_t base = 0;
  for (int m = 0; m < dims_; ++m)
  {
    base += static_cast<std::int64_t>(cell[m]) * modes_ * strides_[m];
  }
  return base;
}

void cell_quadrature::gather(std::span<double const> field, std::span<int const> cell,
                             std::span<double> block) const
{
  double const *src = field.data() + cell_base(cell);
  for (std::int64_t b = 0; b < modes_per_cell_; ++b)
  {
    block[b] = src[local_offsets_[b]];
  }
}

void cell_quadrature::scatter(std::span<double const> block, std::span<int const> cell,
                              std::span<double> field) const
{
  double *dst = field.data() + cell_base(cell);
  for (std::int64_t b = 0; b < modes_per_cell_; ++b)
  {
    dst[local_offsets_[b]] = block[b];
  }
}

Vector project_l2(point_function const &f, dof_map const &dofs, int q)
{
  int const d = dofs.dims();
  check_full_grid_budget(d, dofs.k_poly(), dofs.max_level());
  cell_quadrature const quad(d, dofs.k_poly(), dofs.max_level(), q > 0 ? q : dofs.k_poly() + 2);
  full_grid_field g;
  g.dims      = d;
  g.k_poly    = dofs.k_poly();
  g.max_level = dofs.max_level();
  g.data.assign(dofs.full_size(), 0.0);

  std::int64_t const cells = ipow(quad.cells_per_dim(), d);
  std::int64_t const pts   = quad.points_per_cell();
  std::int64_t const work_size = std::max(pts, quad.modes_per_cell()) * 2;
  std::vector<double> values(pts), block(quad.modes_per_cell()), work(work_size);
  std::vector<int> cell(d);
  std::vector<double> x(d);
  for (std::int64_t c = 0; c < cells; ++c)
  {
    cell_from_flat(c, d, quad.cells_per_dim(), cell);
    for (std::int64_t p = 0; p < pts; ++p)
    {
      quad.point_coords(cell, p, x);
      values[p] = f(x);
    }
    quad.to_modes(values, block, work);
    quad.scatter(block, cell, g.data);
  }
  return from_fullgrid(g, dofs);
}

double eval_point(std::span<double const> c, dof_map const &dofs, std::span<double const> x)
{
  expect(static_cast<std::int64_t>(c.size()) == dofs.size(), "eval_point: size mismatch");
  expect(static_cast<int>(x.size()) == dofs.dims(), "eval_point: dimension mismatch");
  for (double xm : x)
  {
    if (!(xm >= 0.0 && xm <= 1.0))
    {
      throw std::domain_error("eval_point: point outside [0,1]^d");
    }
  }
  auto const &basis = dofs.basis();
  int const n1d     = basis.size();
  int const d       = dofs.dims();
  std::vector<double> table(static_cast<std::size_t>(n1d) * d);
  for (int m = 0; m < d; ++m)
  {
    for (int a = 0; a < n1d; ++a)
    {
      table[m * n1d + a] = basis.eval(basis.unflatten(a), x[m]);
    }
  }
  double value = 0.0;
  for (std::int64_t i = 0; i < dofs.size(); ++i)
  {
    double w = c[i];
    for (int m = 0; m < d && w != 0.0; ++m)
    {
      w *= table[m * n1d + dofs.index_1d(i, m)];
    }
    value += w;
  }
  return value;
}

void write_snapshot_csv(std::string const &path, std::span<Vector const> species,
                        dof_map const &dofs, int points_per_dim)
{
  expect(points_per_dim >= 1, "snapshot lattice needs at least one point per direction");
  std::vector<full_grid_field> fields;
  for (auto const &s : species)
  {
    fields.push_back(to_fullgrid(std::span<double const>(s.data(), s.size()), dofs));
  }
  std::ofstream out(path);
  if (!out)
  {
    throw validation_error("cannot open snapshot file " + path);
  }
  int const d = dofs.dims();
  for (int m = 0; m < d; ++m)
  {
    out << (m ? "," : "") << "x" << (m + 1);
  }
  for (std::size_t s = 0; s < fields.size(); ++s)
  {
    out << ",species_" << s;
  }
  out << '\n';
  std::vector<double> x(d);
  char buf[64];
  for_each_tuple(std::vector<int>(d, points_per_dim), [&](std::vector<int> const &idx) {
    for (int m = 0; m < d; ++m)
    {
      x[m] = (idx[m] + 0.5) / points_per_dim;
      std::snprintf(buf, sizeof(buf), "%s%.6g", m ? "," : "", x[m]);
      out << buf;
    }
    for (auto const &f : fields)
    {
      std::snprintf(buf, sizeof(buf), ",%.12g", f.eval(x));
      out << buf;
    }
    out << '\n';
  });
}

} // namespace sgiif
