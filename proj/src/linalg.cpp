#include "dampwave/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace dampwave::linalg {

EigenSystem eig(const CMatrix& G, bool vectors) {
  const lapack_int n = static_cast<lapack_int>(G.rows());
  if (G.cols() != G.rows())
    throw ValidationError("eig: matrix must be square");
  EigenSystem out;
  CMatrix work = G;
  out.values.resize(n);
  if (vectors) {
    out.right.resize(n, n);
    out.left.resize(n, n);
  }
  const char jobv = vectors ? 'V' : 'N';
  lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, jobv, jobv, n, work.data(), n,
                                  out.values.data(), vectors ? out.left.data() : nullptr, n,
                                  vectors ? out.right.data() : nullptr, n);
  if (info < 0)
    throw NumericalError("zgeev: illegal argument " + std::to_string(-info));
  out.converged = info == 0;
  return out;
}

RVector singular_values(const CMatrix& M) {
  const lapack_int m = static_cast<lapack_int>(M.rows());
  const lapack_int n = static_cast<lapack_int>(M.cols());
  CMatrix work = M;
  RVector s(std::min(m, n));
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.data(), nullptr,
                                   1, nullptr, 1);
  if (info != 0)
    throw NumericalError("zgesdd failed with info " + std::to_string(info));
  return s;
}

double smallest_singular_value(const CMatrix& M) {
  const RVector s = singular_values(M);
  return s.size() ? s(s.size() - 1) : 0.0;
}

HermitianEigen hermitian_eig(const CMatrix& H, bool vectors) {
  const lapack_int n = static_cast<lapack_int>(H.rows());
  HermitianEigen out;
  out.vectors = H;
  out.values.resize(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                                   out.vectors.data(), n, out.values.data());
  if (info != 0)
    throw NumericalError("zheevd failed with info " + std::to_string(info));
  if (!vectors)
    out.vectors.resize(0, 0);
  return out;
}

RVector tridiagonal_eigenvalues(const RVector& d, const RVector& e) {
  const lapack_int n = static_cast<lapack_int>(d.size());
  RVector values = d;
  RVector off = e;
  if (off.size() < std::max<Eigen::Index>(n - 1, 0))
    throw ValidationError("tridiagonal_eigenvalues: off-diagonal too short");
  lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, values.data(), off.data(), nullptr, 1);
  if (info != 0)
    throw NumericalError("dstev failed with info " + std::to_string(info));
  return values;
}

namespace {
thread_local const std::function<bool(cplx)>* g_select = nullptr;

lapack_logical select_trampoline(const lapack_complex_double* z) {
  return (*g_select)(*z) ? 1 : 0;
}
} // namespace

CMatrix invariant_subspace(const CMatrix& G, const std::function<bool(cplx)>& select) {
  const lapack_int n = static_cast<lapack_int>(G.rows());
  CMatrix T = G;
  CMatrix Z(n, n);
  CVector w(n);
  lapack_int sdim = 0;
  g_select = &select;
  lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'S', select_trampoline, n, T.data(), n,
                                  &sdim, w.data(), Z.data(), n);
  g_select = nullptr;
  if (info != 0 && info != n + 2)
    throw NumericalError("zgees failed with info " + std::to_string(info));
  return Z.leftCols(sdim);
}

CMatrix expm(const CMatrix& M) {
  const Eigen::Index n = M.rows();
  static constexpr double b[] = {64764752532480000.0,
                                 32382376266240000.0,
                                 7771770303897600.0,
                                 1187353796428800.0,
                                 129060195264000.0,
                                 10559470521600.0,
                                 670442572800.0,
                                 33522128640.0,
                                 1323241920.0,
                                 40840800.0,
                                 960960.0,
                                 16380.0,
                                 182.0,
                                 1.0};
  constexpr double theta13 = 5.371920351148152;
  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13)
    s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const CMatrix A = M / std::ldexp(1.0, s);
  const CMatrix I = CMatrix::Identity(n, n);
  const CMatrix A2 = A * A;
  const CMatrix A4 = A2 * A2;
  const CMatrix A6 = A4 * A2;
  CMatrix inner = b[13] * A6 + b[11] * A4 + b[9] * A2;
  CMatrix U = A6 * inner;
  U += b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I;
  U = (A * U).eval();
  inner = b[12] * A6 + b[10] * A4 + b[8] * A2;
  CMatrix V = A6 * inner;
  V += b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  CMatrix R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k)
    R = (R * R).eval();
  return R;
}

std::vector<std::vector<int>> coupling_blocks(const std::vector<const CMatrix*>& matrices) {
  if (matrices.empty())
    return {};
  const int n = static_cast<int>(matrices.front()->rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i)
      i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const CMatrix* M : matrices) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (i != j && (*M)(i, j) != cplx{}) {
          const int a = find(i), c = find(j);
          if (a != c)
            parent[std::max(a, c)] = std::min(a, c);
        }
  }
  std::vector<std::vector<int>> blocks;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(i);
  }
  return blocks;
}

namespace {
CMatrix triangular_factor(const CMatrix& X) {
  const Eigen::Index k = std::min(X.rows(), X.cols());
  Eigen::HouseholderQR<CMatrix> qr(X);
  CMatrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return R;
}
} // namespace

double low_rank_norm(const CMatrix& U, const CMatrix& M, const CMatrix& V) {
  if (U.cols() == 0 || V.cols() == 0)
    return 0.0;
  const CMatrix small = triangular_factor(U) * M * triangular_factor(V).adjoint();
  Eigen::JacobiSVD<CMatrix> svd(small);
  return svd.singularValues()(0);
}

} // namespace dampwave::linalg
