#include "sgiif/operator_assembly.hpp"

#include "sgiif/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace sgiif
{
namespace
{
// One side of a face: the cell-local modes touching it with their
// contributions to the jump [u] and to the average of u' (already
// multiplied by the normal convention).
struct face_side
{
  int cell;
  std::vector<double> jump;
  std::vector<double> avg;
};

// Face terms of a 1D DG form. `form` receives the jump and average
// coefficient vectors of every face and returns the local face matrix.
template<typename FaceForm>
Matrix assemble_local(int k_poly, int max_level, bc_kind bc, FaceForm &&form)
{
  int const modes = k_poly + 1;
  int const cells = static_cast<int>(pow2(max_level));
  double const h  = 1.0 / cells;
  int const n     = modes * cells;
  Matrix s        = Matrix::Zero(n, n);

  // volume: int u' v'
  auto const rule = gauss_rule(modes + 1);
  Matrix volume   = Matrix::Zero(modes, modes);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
  {
    for (int p = 0; p < modes; ++p)
    {
      for (int q = 0; q < modes; ++q)
      {
        volume(p, q) += rule.weights[i] * h *
                        local_legendre_derivative(p, rule.nodes[i], h) *
                        local_legendre_derivative(q, rule.nodes[i], h);
      }
    }
  }
  for (int c = 0; c < cells; ++c)
  {
    s.block(c * modes, c * modes, modes, modes) += volume;
  }

  // a face couples at most two cells; entries of a side are indexed by mode
  auto const add_face = [&](std::vector<face_side> const &sides) {
    std::vector<int> index;
    std::vector<double> jump, avg;
    for (auto const &side : sides)
    {
      for (int p = 0; p < modes; ++p)
      {
        index.push_back(side.cell * modes + p);
        jump.push_back(side.jump[p]);
        avg.push_back(side.avg[p]);
      }
    }
    Matrix const local = form(jump, avg);
    for (std::size_t a = 0; a < index.size(); ++a)
    {
      for (std::size_t b = 0; b < index.size(); ++b)
      {
        s(index[a], index[b]) += local(a, b);
      }
    }
  };

  auto const trace = [&](double at, double normal, double weight) {
    face_side side{0, std::vector<double>(modes), std::vector<double>(modes)};
    for (int p = 0; p < modes; ++p)
    {
      side.jump[p] = normal * local_legendre(p, at, h);
      side.avg[p]  = weight * local_legendre_derivative(p, at, h);
    }
    return side;
  };

  // interior faces: left cell contributes +u, right cell -u to the jump
  for (int c = 0; c + 1 < cells; ++c)
  {
    auto left  = trace(1.0, 1.0, 0.5);
    auto right = trace(0.0, -1.0, 0.5);
    left.cell  = c;
    right.cell = c + 1;
    add_face({left, right});
  }
  if (bc == bc_kind::periodic)
  {
    auto left  = trace(1.0, 1.0, 0.5);
    auto right = trace(0.0, -1.0, 0.5);
    left.cell  = cells - 1;
    right.cell = 0;
    add_face({left, right});
  }
  else
  {
    // boundary faces: [u] = u n with outward n, {u'} = u'
    auto lower  = trace(0.0, -1.0, 1.0);
    lower.cell  = 0;
    auto upper  = trace(1.0, 1.0, 1.0);
    upper.cell  = cells - 1;
    add_face({lower});
    add_face({upper});
  }
  return s;
}

Matrix to_hierarchical(hierarchical_basis const &basis, Matrix const &local)
{
  int const n = basis.size();
  Matrix t1(n, n);
  std::vector<double> line(n);
  for (int c = 0; c < n; ++c)
  {
    for (int r = 0; r < n; ++r)
    {
      line[r] = local(r, c);
    }
    basis.forward(line);
    for (int r = 0; r < n; ++r)
    {
      t1(r, c) = line[r];
    }
  }
  Matrix result(n, n);
  for (int r = 0; r < n; ++r)
  {
    for (int c = 0; c < n; ++c)
    {
      line[c] = t1(r, c);
    }
    basis.forward(line);
    for (int c = 0; c < n; ++c)
    {
      result(r, c) = line[c];
    }
  }
  // symmetric up to rounding; make it exact
  return 0.5 * (result + result.transpose());
}
} // namespace

void csr_matrix::apply(Vector const &x, Vector &y) const
{
  y.resize(rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r)
  {
    double s = 0.0;
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
    {
      s += values[k] * x[col_idx[k]];
    }
    y[r] = s;
  }
}

Vector csr_matrix::operator*(Vector const &x) const
{
  Vector y(rows);
  apply(x, y);
  return y;
}

csr_matrix csr_matrix::scaled(double factor) const
{
  csr_matrix m = *this;
  for (double &v : m.values)
  {
    v *= factor;
  }
  return m;
}

Matrix csr_matrix::to_dense() const
{
  Matrix d = Matrix::Zero(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r)
  {
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
    {
      d(r, col_idx[k]) += values[k];
    }
  }
  return d;
}

double csr_matrix::entry(std::int64_t r, std::int64_t c) const
{
  auto const begin = col_idx.begin() + row_ptr[r];
  auto const end   = col_idx.begin() + row_ptr[r + 1];
  auto const it    = std::lower_bound(begin, end, c);
  return (it != end && *it == c) ? values[it - col_idx.begin()] : 0.0;
}

void csr_matrix::write_matrix_market(std::ostream &out) const
{
  std::int64_t lower = 0;
  for (std::int64_t r = 0; r < rows; ++r)
  {
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
    {
      lower += col_idx[k] <= r ? 1 : 0;
    }
  }
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << rows << ' ' << cols << ' ' << lower << '\n';
  out.precision(17);
  for (std::int64_t r = 0; r < rows; ++r)
  {
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
    {
      if (col_idx[k] <= r)
      {
        out << (r + 1) << ' ' << (col_idx[k] + 1) << ' ' << values[k] << '\n';
      }
    }
  }
}

Matrix build_1d_ipdg_local(int k_poly, int max_level, bc_kind bc, penalty_spec penalty)
{
  expect(penalty.sigma > 0.0, "penalty parameter must be positive");
  double const h        = std::ldexp(1.0, -max_level);
  double const weight   = penalty.sigma / h;
  return assemble_local(k_poly, max_level, bc,
                        [&](std::vector<double> const &jump, std::vector<double> const &avg) {
                          int const n = static_cast<int>(jump.size());
                          Matrix m(n, n);
                          for (int a = 0; a < n; ++a)
                          {
                            for (int b = 0; b < n; ++b)
                            {
                              m(a, b) = -avg[b] * jump[a] - avg[a] * jump[b] +
                                        weight * jump[a] * jump[b];
                            }
                          }
                          return m;
                        });
}

Matrix build_1d_ipdg(hierarchical_basis const &basis, bc_kind bc, penalty_spec penalty)
{
  return to_hierarchical(basis,
                         build_1d_ipdg_local(basis.k_poly(), basis.max_level(), bc, penalty));
}

Matrix build_1d_energy(hierarchical_basis const &basis, bc_kind bc)
{
  double const h = std::ldexp(1.0, -basis.max_level());
  Matrix const local =
      assemble_local(basis.k_poly(), basis.max_level(), bc,
                     [&](std::vector<double> const &jump, std::vector<double> const &avg) {
                       int const n = static_cast<int>(jump.size());
                       Matrix m(n, n);
                       for (int a = 0; a < n; ++a)
                       {
                         for (int b = 0; b < n; ++b)
                         {
                           m(a, b) = h * avg[a] * avg[b] + jump[a] * jump[b] / h;
                         }
                       }
                       return m;
                     });
  return to_hierarchical(basis, local);
}

sparse_rows sparsify(Matrix const &dense, double drop_tolerance)
{
  double const cutoff = drop_tolerance * dense.cwiseAbs().maxCoeff();
  sparse_rows s;
  s.rows.resize(dense.rows());
  for (Eigen::Index r = 0; r < dense.rows(); ++r)
  {
    for (Eigen::Index c = 0; c < dense.cols(); ++c)
    {
      if (std::abs(dense(r, c)) > cutoff)
      {
        s.rows[r].emplace_back(static_cast<int>(c), dense(r, c));
      }
    }
  }
  return s;
}

csr_matrix assemble_kronecker_sum(dof_map const &dofs, sparse_rows const &one_d, double scale)
{
  std::int64_t const n = dofs.size();
  int const d          = dofs.dims();
  csr_matrix a;
  a.rows = a.cols = n;
  a.row_ptr.assign(n + 1, 0);
  std::vector<std::pair<std::int64_t, double>> entries;
  std::vector<int> neighbour(d);
  for (std::int64_t i = 0; i < n; ++i)
  {
    entries.clear();
    auto const idx = dofs.indices(i);
    for (int m = 0; m < d; ++m)
    {
      std::copy(idx.begin(), idx.end(), neighbour.begin());
      for (auto const &[col, value] : one_d.rows[idx[m]])
      {
        neighbour[m]        = col;
        std::int64_t const j = dofs.find(neighbour);
        if (j >= 0)
        {
          entries.emplace_back(j, scale * value);
        }
      }
    }
    std::sort(entries.begin(), entries.end(),
              [](auto const &x, auto const &y) { return x.first < y.first; });
    for (std::size_t e = 0; e < entries.size(); ++e)
    {
      if (!a.col_idx.empty() && static_cast<std::int64_t>(a.col_idx.size()) > a.row_ptr[i] &&
          a.col_idx.back() == entries[e].first)
      {
        a.values.back() += entries[e].second;
      }
      else
      {
        a.col_idx.push_back(entries[e].first);
        a.values.push_back(entries[e].second);
      }
    }
    a.row_ptr[i + 1] = static_cast<std::int64_t>(a.values.size());
  }
  return a;
}

csr_matrix assemble_diffusion(dof_map const &dofs, double kappa, bc_kind bc,
                              penalty_spec penalty)
{
  expect(kappa >= 0.0, "diffusion constant must be non-negative");
  auto const one_d = sparsify(build_1d_ipdg(dofs.basis(), bc, penalty));
  return assemble_kronecker_sum(dofs, one_d, -kappa);
}

kronecker_sum_operator::kronecker_sum_operator(dof_map const &dofs, sparse_rows one_d,
                                               double scale)
    : dofs_(&dofs), one_d_(std::move(one_d)), scale_(scale)
{
}

void kronecker_sum_operator::apply(Vector const &x, Vector &y) const
{
  std::int64_t const n = dofs_->size();
  int const d          = dofs_->dims();
  y.setZero(n);
  std::vector<int> neighbour(d);
  for (std::int64_t i = 0; i < n; ++i)
  {
    auto const idx = dofs_->indices(i);
    double s       = 0.0;
    for (int m = 0; m < d; ++m)
    {
      std::copy(idx.begin(), idx.end(), neighbour.begin());
      for (auto const &[col, value] : one_d_.rows[idx[m]])
      {
        neighbour[m]        = col;
        std::int64_t const j = dofs_->find(neighbour);
        if (j >= 0)
        {
          s += value * x[j];
        }
      }
    }
    y[i] = scale_ * s;
  }
}

Vector dirichlet_load(dof_map const &dofs, boundary_condition const &bc, double kappa,
                      penalty_spec penalty, double t)
{
  expect(bc.kind == bc_kind::dirichlet, "dirichlet_load requires a Dirichlet condition");
  Vector load = Vector::Zero(dofs.size());
  if (!bc.g)
  {
    return load;
  }
  int const d       = dofs.dims();
  auto const &basis = dofs.basis();
  int const n1d     = basis.size();
  double const h    = std::ldexp(1.0, -dofs.max_level());

  // trace factors (-v' n + sigma/h v) of every 1D function at both ends
  std::vector<double> trace_lower(n1d), trace_upper(n1d);
  for (int a = 0; a < n1d; ++a)
  {
    auto const w   = basis.unflatten(a);
    trace_lower[a] = basis.eval(w, 0.0, 1) + penalty.sigma / h * basis.eval(w, 0.0, 0);
    trace_upper[a] = -basis.eval(w, 1.0, 1) + penalty.sigma / h * basis.eval(w, 1.0, 0);
  }

  std::vector<double> x(d);
  for (int m = 0; m < d; ++m)
  {
    for (int side = 0; side < 2; ++side)
    {
      double const xm = side == 0 ? 0.0 : 1.0;
      auto const &tr  = side == 0 ? trace_lower : trace_upper;
      if (d == 1)
      {
        x[0]             = xm;
        double const gv  = bc.g(x, t);
        for (std::int64_t i = 0; i < dofs.size(); ++i)
        {
          load[i] += kappa * tr[dofs.index_1d(i, 0)] * gv;
        }
        continue;
      }
      // hierarchical coefficients of g restricted to the face
      int const df = d - 1;
      check_full_grid_budget(df, dofs.k_poly(), dofs.max_level());
      cell_quadrature const quad(df, dofs.k_poly(), dofs.max_level(), dofs.k_poly() + 2);
      std::int64_t face_size = 1, face_cells = 1;
      for (int i = 0; i < df; ++i)
      {
        face_size *= n1d;
        face_cells *= quad.cells_per_dim();
      }
      std::vector<double> face(face_size, 0.0);
      std::vector<double> values(quad.points_per_cell()), block(quad.modes_per_cell()),
          work(2 * std::max(quad.points_per_cell(), quad.modes_per_cell()));
      std::vector<int> cell(df);
      std::vector<double> y(df);
      for (std::int64_t c = 0; c < face_cells; ++c)
      {
        cell_from_flat(c, df, quad.cells_per_dim(), cell);
        for (std::int64_t p = 0; p < quad.points_per_cell(); ++p)
        {
          quad.point_coords(cell, p, y);
          for (int i = 0, k = 0; i < d; ++i)
          {
            x[i] = (i == m) ? xm : y[k++];
          }
          values[p] = bc.g(x, t);
        }
        quad.to_modes(values, block, work);
        quad.scatter(block, cell, face);
      }
      forward_full(face, df, basis);
      for (std::int64_t i = 0; i < dofs.size(); ++i)
      {
        std::int64_t offset = 0;
        for (int k = 0; k < d; ++k)
        {
          if (k != m)
          {
            offset = offset * n1d + dofs.index_1d(i, k);
          }
        }
        load[i] += kappa * tr[dofs.index_1d(i, m)] * face[offset];
      }
    }
  }
  return load;
}

double energy_norm(Vector const &c, dof_map const &dofs, bc_kind bc)
{
  expect(c.size() == dofs.size(), "energy_norm: size mismatch");
  auto const e = assemble_kronecker_sum(dofs, sparsify(build_1d_energy(dofs.basis(), bc)), 1.0);
  double const q = c.dot(e * c);
  return std::sqrt(std::max(0.0, q));
}

} // namespace sgiif
