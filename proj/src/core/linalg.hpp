#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Dense complex linear algebra for multipartite states.
// Conventions: row-major storage, tensor factors ordered most-significant
// first (index of A⊗B runs A-major), entropies elsewhere in base 2.

namespace qmc {

using Cx = std::complex<double>;

constexpr double kDefaultTol = 1e-9;           // hermiticity / trace / unitarity
constexpr double kPsdTol = 1e-9;               // eigenvalues below -kPsdTol are rejected
constexpr double kEigOffdiagTarget = 1e-12;    // Jacobi off-diagonal Frobenius mass
constexpr int kEigMaxSweeps = 100;

// Desk-scale guard. Overridable programmatically or with QMC_MAX_DIM.
int dimension_cap();
void set_dimension_cap(int cap);

struct dimension_cap_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct eig_convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ── SpaceShape: ordered tensor-factor dimensions ─────────────────────────────

class SpaceShape {
public:
    SpaceShape() = default;
    explicit SpaceShape(std::vector<int> dims);
    static SpaceShape single(int dim) { return SpaceShape(std::vector<int>{dim}); }
    static SpaceShape uses(int d, int n);  // n factors of dimension d

    int factors() const { return static_cast<int>(dims_.size()); }
    int dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
    const std::vector<int>& dims() const { return dims_; }
    int total_dim() const;
    int stride(int i) const;  // row-major stride of factor i

    SpaceShape appended(int dim) const;
    SpaceShape keep(const std::vector<int>& factors) const;

    bool operator==(const SpaceShape& o) const { return dims_ == o.dims_; }

private:
    std::vector<int> dims_;
};

// ── ComplexMatrix ─────────────────────────────────────────────────────────────

class ComplexMatrix {
public:
    ComplexMatrix() : rows_(0), cols_(0) {}
    ComplexMatrix(int rows, int cols);  // zero-filled
    static ComplexMatrix identity(int n);
    static ComplexMatrix diag(const std::vector<double>& d);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Cx& at(int r, int c) { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
    const Cx& at(int r, int c) const { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
    Cx* data() { return a_.data(); }
    const Cx* data() const { return a_.data(); }

    ComplexMatrix adjoint() const;
    Cx trace() const;
    double max_abs() const;          // entrywise max modulus
    double frobenius() const;

    bool is_hermitian(double tol = kDefaultTol) const;
    bool is_unitary(double tol = kDefaultTol) const;
    bool all_finite() const;

    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);
    ComplexMatrix& operator*=(Cx s);
    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(Cx s, ComplexMatrix a) { return a *= s; }
    ComplexMatrix operator*(const ComplexMatrix& o) const;  // matmul

private:
    int rows_, cols_;
    std::vector<Cx> a_;
};

// Pure states as coefficient vectors.
using CVec = std::vector<Cx>;

double norm(const CVec& v);
CVec normalized(const CVec& v);
CVec tensor(const CVec& a, const CVec& b);
ComplexMatrix outer(const CVec& v);            // |v⟩⟨v|
CVec basis_vec(int dim, int k);

// ── Tensor / partial trace / factor-local actions ────────────────────────────

// Kronecker product, a's indices major. Errors if the result exceeds the cap.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

// Trace out every factor not listed in keep (ascending, no duplicates).
ComplexMatrix partial_trace(const ComplexMatrix& m, const SpaceShape& shape,
                            const std::vector<int>& keep);

// Full-space matrix for u acting on the listed factors (in the listed order),
// identity elsewhere.
ComplexMatrix embed_unitary(const ComplexMatrix& u, const SpaceShape& shape,
                            const std::vector<int>& factors);

// rho -> (I⊗u) rho (I⊗u)† with u on the listed factors. Avoids forming the
// embedded matrix.
ComplexMatrix conjugate_on_factors(const ComplexMatrix& rho, const SpaceShape& shape,
                                   const std::vector<int>& factors, const ComplexMatrix& u);

// A-side action only: rho -> (I⊗op) rho. Same indexing scheme.
ComplexMatrix left_apply_on_factors(const ComplexMatrix& rho, const SpaceShape& shape,
                                    const std::vector<int>& factors, const ComplexMatrix& op);

ComplexMatrix swap_unitary(int d);  // SWAP on two factors of equal dimension d

// ── Hermitian eigendecomposition (cyclic Jacobi) ─────────────────────────────

struct EigResult {
    std::vector<double> values;  // descending
    ComplexMatrix vectors;       // columns follow values
};

// Errors on non-Hermitian input (tol) and on non-convergence within
// kEigMaxSweeps sweeps of the kEigOffdiagTarget mass.
EigResult hermitian_eig(const ComplexMatrix& h, double tol = kDefaultTol);
std::vector<double> hermitian_eigvals(const ComplexMatrix& h, double tol = kDefaultTol);

// ── Distances ─────────────────────────────────────────────────────────────────

// (1/2)·Σ|eigenvalues(a−b)| for Hermitian a, b of equal dimension.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

// (1/2)·Σ|p_i−q_i| over distributions of equal length.
double distribution_distance(const std::vector<double>& p, const std::vector<double>& q);

// ── DensityMatrix ─────────────────────────────────────────────────────────────

struct Tolerances {
    double hermiticity = kDefaultTol;
    double trace = kDefaultTol;
    double psd = kPsdTol;
};

// Validated state: Hermitian within tol, unit trace within tol, smallest
// eigenvalue ≥ -psd tol (eigenvalues in [-psd, 0) are clamped on read).
class DensityMatrix {
public:
    DensityMatrix() = default;
    DensityMatrix(ComplexMatrix m, SpaceShape shape, Tolerances tol = Tolerances{});
    explicit DensityMatrix(ComplexMatrix m, Tolerances tol = Tolerances{});

    // Skips the eigenvalue check; for intermediates that are PSD by
    // construction. Hermiticity/trace are still enforced.
    static DensityMatrix trusted(ComplexMatrix m, SpaceShape shape);

    static DensityMatrix basis(int dim, int k);
    static DensityMatrix maximally_mixed(int dim);
    static DensityMatrix pure(const CVec& v);

    const ComplexMatrix& matrix() const { return m_; }
    const SpaceShape& shape() const { return shape_; }
    int dim() const { return m_.rows(); }
    const Tolerances& tolerances() const { return tol_; }

    DensityMatrix with_shape(SpaceShape s) const;
    DensityMatrix partial(const std::vector<int>& keep) const;

private:
    ComplexMatrix m_;
    SpaceShape shape_;
    Tolerances tol_;
};

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// Random objects for sampling-based checks (Haar / Ginibre ensembles).
class Rng;
CVec random_pure_state(int dim, Rng& rng);
ComplexMatrix random_unitary(int dim, Rng& rng);
DensityMatrix random_density(int dim, Rng& rng, int rank = 0);  // rank 0 = full

}  // namespace qmc
