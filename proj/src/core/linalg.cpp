#include "core/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>

#include "core/rng.hpp"

namespace qmc {

namespace {

std::atomic<int>& cap_storage() {
    static std::atomic<int> cap = [] {
        int c = 1024;
        if (const char* env = std::getenv("QMC_MAX_DIM")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 2 && v <= (1 << 20)) c = static_cast<int>(v);
        }
        return std::atomic<int>(c);
    }();
    return cap;
}

void check_cap(long dim, const char* what) {
    const int cap = dimension_cap();
    if (dim > cap)
        throw dimension_cap_error(std::string(what) + ": dimension " + std::to_string(dim) +
                                  " exceeds cap " + std::to_string(cap) +
                                  " (raise with QMC_MAX_DIM)");
}

}  // namespace

int dimension_cap() { return cap_storage().load(); }

void set_dimension_cap(int cap) {
    if (cap < 2) throw std::invalid_argument("set_dimension_cap: cap < 2");
    cap_storage().store(cap);
}

// ── SpaceShape ────────────────────────────────────────────────────────────────

SpaceShape::SpaceShape(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("SpaceShape: no factors");
    for (int d : dims_)
        if (d < 1) throw std::invalid_argument("SpaceShape: factor dimension < 1");
}

SpaceShape SpaceShape::uses(int d, int n) {
    if (n < 1) throw std::invalid_argument("SpaceShape::uses: n < 1");
    return SpaceShape(std::vector<int>(static_cast<std::size_t>(n), d));
}

int SpaceShape::total_dim() const {
    long t = 1;
    for (int d : dims_) t *= d;
    return static_cast<int>(t);
}

int SpaceShape::stride(int i) const {
    long s = 1;
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < dims_.size(); ++j) s *= dims_[j];
    return static_cast<int>(s);
}

SpaceShape SpaceShape::appended(int dim) const {
    std::vector<int> d = dims_;
    d.push_back(dim);
    return SpaceShape(std::move(d));
}

SpaceShape SpaceShape::keep(const std::vector<int>& factors) const {
    std::vector<int> d;
    for (int f : factors) d.push_back(dim(f));
    return SpaceShape(std::move(d));
}

// ── ComplexMatrix ─────────────────────────────────────────────────────────────

ComplexMatrix::ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("ComplexMatrix: negative dimension");
    a_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), Cx(0, 0));
}

ComplexMatrix ComplexMatrix::identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diag(const std::vector<double>& d) {
    ComplexMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m.at(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) m.at(c, r) = std::conj(at(r, c));
    return m;
}

Cx ComplexMatrix::trace() const {
    if (rows_ != cols_) throw std::invalid_argument("trace: non-square matrix");
    Cx t = 0;
    for (int i = 0; i < rows_; ++i) t += at(i, i);
    return t;
}

double ComplexMatrix::max_abs() const {
    double m = 0;
    for (const Cx& z : a_) m = std::max(m, std::abs(z));
    return m;
}

double ComplexMatrix::frobenius() const {
    double s = 0;
    for (const Cx& z : a_) s += std::norm(z);
    return std::sqrt(s);
}

bool ComplexMatrix::is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    for (int r = 0; r < rows_; ++r)
        for (int c = r; c < cols_; ++c)
            if (std::abs(at(r, c) - std::conj(at(c, r))) > tol) return false;
    return true;
}

bool ComplexMatrix::is_unitary(double tol) const {
    if (rows_ != cols_) return false;
    const ComplexMatrix g = adjoint() * (*this);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) {
            const Cx want = (r == c) ? Cx(1, 0) : Cx(0, 0);
            if (std::abs(g.at(r, c) - want) > tol) return false;
        }
    return true;
}

bool ComplexMatrix::all_finite() const {
    for (const Cx& z : a_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix +: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix -: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Cx s) {
    for (Cx& z : a_) z *= s;
    return *this;
}

ComplexMatrix ComplexMatrix::operator*(const ComplexMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matmul: inner dimension mismatch");
    ComplexMatrix out(rows_, o.cols_);
    for (int r = 0; r < rows_; ++r) {
        for (int k = 0; k < cols_; ++k) {
            const Cx v = at(r, k);
            if (v == Cx(0, 0)) continue;
            const Cx* src = o.data() + static_cast<std::size_t>(k) * o.cols_;
            Cx* dst = out.data() + static_cast<std::size_t>(r) * o.cols_;
            for (int c = 0; c < o.cols_; ++c) dst[c] += v * src[c];
        }
    }
    return out;
}

// ── Vectors ───────────────────────────────────────────────────────────────────

double norm(const CVec& v) {
    double s = 0;
    for (const Cx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

CVec normalized(const CVec& v) {
    const double n = norm(v);
    if (n <= 0) throw std::invalid_argument("normalized: zero vector");
    CVec out = v;
    for (Cx& z : out) z /= n;
    return out;
}

CVec tensor(const CVec& a, const CVec& b) {
    check_cap(static_cast<long>(a.size()) * static_cast<long>(b.size()), "tensor(vec)");
    CVec out(a.size() * b.size());
    std::size_t i = 0;
    for (const Cx& x : a)
        for (const Cx& y : b) out[i++] = x * y;
    return out;
}

ComplexMatrix outer(const CVec& v) {
    const int d = static_cast<int>(v.size());
    ComplexMatrix m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m.at(r, c) = v[static_cast<std::size_t>(r)] * std::conj(v[static_cast<std::size_t>(c)]);
    return m;
}

CVec basis_vec(int dim, int k) {
    if (k < 0 || k >= dim) throw std::invalid_argument("basis_vec: index out of range");
    CVec v(static_cast<std::size_t>(dim), Cx(0, 0));
    v[static_cast<std::size_t>(k)] = 1.0;
    return v;
}

// ── Tensor and factor-indexed operations ─────────────────────────────────────

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    check_cap(static_cast<long>(a.rows()) * b.rows(), "tensor");
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int ra = 0; ra < a.rows(); ++ra)
        for (int ca = 0; ca < a.cols(); ++ca) {
            const Cx v = a.at(ra, ca);
            if (v == Cx(0, 0)) continue;
            for (int rb = 0; rb < b.rows(); ++rb)
                for (int cb = 0; cb < b.cols(); ++cb)
                    out.at(ra * b.rows() + rb, ca * b.cols() + cb) = v * b.at(rb, cb);
        }
    return out;
}

namespace {

// Index bookkeeping for a factor subset: for each full index, the subset
// index it carries and the full index with subset digits zeroed.
struct FactorView {
    int sub_dim = 1;
    std::vector<int> sub_of;     // full index -> packed subset index
    std::vector<int> base_of;    // full index -> full index with subset digits cleared
    std::vector<int> offset_of;  // packed subset index -> contribution to full index

    FactorView(const SpaceShape& shape, const std::vector<int>& factors) {
        const int total = shape.total_dim();
        std::vector<int> strides, dims;
        for (int f : factors) {
            if (f < 0 || f >= shape.factors())
                throw std::invalid_argument("factor index out of range");
            strides.push_back(shape.stride(f));
            dims.push_back(shape.dim(f));
            sub_dim *= shape.dim(f);
        }
        for (std::size_t i = 0; i < factors.size(); ++i)
            for (std::size_t j = i + 1; j < factors.size(); ++j)
                if (factors[i] == factors[j])
                    throw std::invalid_argument("duplicate factor index");
        sub_of.resize(static_cast<std::size_t>(total));
        base_of.resize(static_cast<std::size_t>(total));
        for (int x = 0; x < total; ++x) {
            int sub = 0, base = x;
            for (std::size_t k = 0; k < strides.size(); ++k) {
                const int digit = (x / strides[k]) % dims[k];
                sub = sub * dims[k] + digit;
                base -= digit * strides[k];
            }
            sub_of[static_cast<std::size_t>(x)] = sub;
            base_of[static_cast<std::size_t>(x)] = base;
        }
        offset_of.resize(static_cast<std::size_t>(sub_dim));
        for (int s = 0; s < sub_dim; ++s) {
            int rem = s, off = 0;
            for (std::size_t k = strides.size(); k-- > 0;) {
                off += (rem % dims[k]) * strides[k];
                rem /= dims[k];
            }
            offset_of[static_cast<std::size_t>(s)] = off;
        }
    }
};

}  // namespace

ComplexMatrix partial_trace(const ComplexMatrix& m, const SpaceShape& shape,
                            const std::vector<int>& keep) {
    if (m.rows() != m.cols()) throw std::invalid_argument("partial_trace: non-square matrix");
    if (m.rows() != shape.total_dim())
        throw std::invalid_argument("partial_trace: shape does not match matrix dimension");
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
    for (std::size_t i = 0; i + 1 < keep.size(); ++i)
        if (keep[i] >= keep[i + 1])
            throw std::invalid_argument("partial_trace: keep set must be strictly ascending");

    std::vector<int> traced;
    for (int f = 0; f < shape.factors(); ++f)
        if (std::find(keep.begin(), keep.end(), f) == keep.end()) traced.push_back(f);

    const FactorView kv(shape, keep);
    const FactorView tv(shape, traced.empty() ? std::vector<int>{} : traced);

    ComplexMatrix out(kv.sub_dim, kv.sub_dim);
    if (traced.empty()) {  // degenerate: keep everything
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c) out.at(kv.sub_of[static_cast<std::size_t>(r)], kv.sub_of[static_cast<std::size_t>(c)]) = m.at(r, c);
        return out;
    }
    for (int rk = 0; rk < kv.sub_dim; ++rk) {
        const int rbase = kv.offset_of[static_cast<std::size_t>(rk)];
        for (int ck = 0; ck < kv.sub_dim; ++ck) {
            const int cbase = kv.offset_of[static_cast<std::size_t>(ck)];
            Cx s = 0;
            for (int t = 0; t < tv.sub_dim; ++t) {
                const int off = tv.offset_of[static_cast<std::size_t>(t)];
                s += m.at(rbase + off, cbase + off);
            }
            out.at(rk, ck) = s;
        }
    }
    return out;
}

ComplexMatrix embed_unitary(const ComplexMatrix& u, const SpaceShape& shape,
                            const std::vector<int>& factors) {
    const FactorView fv(shape, factors);
    if (u.rows() != fv.sub_dim || u.cols() != fv.sub_dim)
        throw std::invalid_argument("embed_unitary: operator does not match factor dimensions");
    const int total = shape.total_dim();
    check_cap(total, "embed_unitary");
    ComplexMatrix out(total, total);
    for (int r = 0; r < total; ++r) {
        const int rs = fv.sub_of[static_cast<std::size_t>(r)];
        const int rbase = fv.base_of[static_cast<std::size_t>(r)];
        for (int cs = 0; cs < fv.sub_dim; ++cs) {
            const Cx v = u.at(rs, cs);
            if (v == Cx(0, 0)) continue;
            out.at(r, rbase + fv.offset_of[static_cast<std::size_t>(cs)]) = v;
        }
    }
    return out;
}

ComplexMatrix left_apply_on_factors(const ComplexMatrix& rho, const SpaceShape& shape,
                                    const std::vector<int>& factors, const ComplexMatrix& op) {
    const FactorView fv(shape, factors);
    if (op.rows() != fv.sub_dim || op.cols() != fv.sub_dim)
        throw std::invalid_argument("left_apply_on_factors: operator/factor mismatch");
    const int total = shape.total_dim();
    if (rho.rows() != total || rho.cols() != total)
        throw std::invalid_argument("left_apply_on_factors: state/shape mismatch");
    ComplexMatrix out(total, total);
    for (int r = 0; r < total; ++r) {
        const int rs = fv.sub_of[static_cast<std::size_t>(r)];
        const int rbase = fv.base_of[static_cast<std::size_t>(r)];
        Cx* dst = out.data() + static_cast<std::size_t>(r) * total;
        for (int ks = 0; ks < fv.sub_dim; ++ks) {
            const Cx v = op.at(rs, ks);
            if (v == Cx(0, 0)) continue;
            const Cx* src = rho.data() + static_cast<std::size_t>(rbase + fv.offset_of[static_cast<std::size_t>(ks)]) * total;
            for (int c = 0; c < total; ++c) dst[c] += v * src[c];
        }
    }
    return out;
}

ComplexMatrix conjugate_on_factors(const ComplexMatrix& rho, const SpaceShape& shape,
                                   const std::vector<int>& factors, const ComplexMatrix& u) {
    const ComplexMatrix half = left_apply_on_factors(rho, shape, factors, u);
    // right side: (half) u† on the same factors = conj of left action on adjoint
    const FactorView fv(shape, factors);
    const int total = shape.total_dim();
    ComplexMatrix out(total, total);
    for (int c = 0; c < total; ++c) {
        const int cs = fv.sub_of[static_cast<std::size_t>(c)];
        const int cbase = fv.base_of[static_cast<std::size_t>(c)];
        for (int ks = 0; ks < fv.sub_dim; ++ks) {
            const Cx v = std::conj(u.at(cs, ks));
            if (v == Cx(0, 0)) continue;
            const int src_c = cbase + fv.offset_of[static_cast<std::size_t>(ks)];
            for (int r = 0; r < total; ++r) out.at(r, c) += half.at(r, src_c) * v;
        }
    }
    return out;
}

ComplexMatrix swap_unitary(int d) {
    ComplexMatrix u(d * d, d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) u.at(b * d + a, a * d + b) = 1.0;
    return u;
}

// ── Distances ─────────────────────────────────────────────────────────────────

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    ComplexMatrix d = a;
    d -= b;
    if (!d.is_hermitian(1e-8)) throw std::invalid_argument("trace_distance: difference not Hermitian");
    double s = 0;
    for (double v : hermitian_eigvals(d, 1e-8)) s += std::abs(v);
    return 0.5 * s;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return trace_distance(a.matrix(), b.matrix());
}

double distribution_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("distribution_distance: length mismatch");
    auto validate = [](const std::vector<double>& v, const char* name) {
        double s = 0;
        for (double x : v) {
            if (x < -kDefaultTol)
                throw std::invalid_argument(std::string("distribution_distance: negative entry in ") + name);
            s += x;
        }
        if (std::abs(s - 1.0) > kDefaultTol)
            throw std::invalid_argument(std::string("distribution_distance: ") + name + " does not sum to 1");
    };
    validate(p, "p");
    validate(q, "q");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

// ── DensityMatrix ─────────────────────────────────────────────────────────────

namespace {

void validate_density(const ComplexMatrix& m, const SpaceShape& shape, const Tolerances& tol,
                      bool check_psd) {
    if (m.rows() != m.cols()) throw std::invalid_argument("DensityMatrix: non-square matrix");
    if (m.rows() != shape.total_dim())
        throw std::invalid_argument("DensityMatrix: shape product does not match dimension");
    if (!m.all_finite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
    if (!m.is_hermitian(tol.hermiticity))
        throw std::invalid_argument("DensityMatrix: not Hermitian within tolerance");
    if (std::abs(m.trace() - Cx(1, 0)) > tol.trace)
        throw std::invalid_argument("DensityMatrix: trace differs from 1 beyond tolerance");
    if (check_psd) {
        const std::vector<double> ev = hermitian_eigvals(m, tol.hermiticity);
        if (!ev.empty() && ev.back() < -tol.psd)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                        std::to_string(ev.back()) + " beyond tolerance");
    }
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix m, SpaceShape shape, Tolerances tol)
    : m_(std::move(m)), shape_(std::move(shape)), tol_(tol) {
    validate_density(m_, shape_, tol_, true);
}

DensityMatrix::DensityMatrix(ComplexMatrix m, Tolerances tol)
    : m_(std::move(m)), shape_(SpaceShape::single(1)), tol_(tol) {
    shape_ = SpaceShape::single(m_.rows());
    validate_density(m_, shape_, tol_, true);
}

DensityMatrix DensityMatrix::trusted(ComplexMatrix m, SpaceShape shape) {
    DensityMatrix d;
    validate_density(m, shape, Tolerances{}, false);
    d.m_ = std::move(m);
    d.shape_ = std::move(shape);
    return d;
}

DensityMatrix DensityMatrix::basis(int dim, int k) {
    if (k < 0 || k >= dim) throw std::invalid_argument("DensityMatrix::basis: index out of range");
    ComplexMatrix m(dim, dim);
    m.at(k, k) = 1.0;
    return trusted(std::move(m), SpaceShape::single(dim));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    ComplexMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0 / dim;
    return trusted(std::move(m), SpaceShape::single(dim));
}

DensityMatrix DensityMatrix::pure(const CVec& v) {
    const double n = norm(v);
    if (std::abs(n - 1.0) > kDefaultTol)
        throw std::invalid_argument("DensityMatrix::pure: vector not normalized");
    return trusted(outer(v), SpaceShape::single(static_cast<int>(v.size())));
}

DensityMatrix DensityMatrix::with_shape(SpaceShape s) const {
    if (s.total_dim() != dim())
        throw std::invalid_argument("with_shape: shape product does not match dimension");
    DensityMatrix d = *this;
    d.shape_ = std::move(s);
    return d;
}

DensityMatrix DensityMatrix::partial(const std::vector<int>& keep) const {
    ComplexMatrix m = partial_trace(m_, shape_, keep);
    return trusted(std::move(m), shape_.keep(keep));
}

// ── Random sampling ───────────────────────────────────────────────────────────

CVec random_pure_state(int dim, Rng& rng) {
    CVec v(static_cast<std::size_t>(dim));
    for (Cx& z : v) z = rng.complex_gaussian();
    return normalized(v);
}

ComplexMatrix random_unitary(int dim, Rng& rng) {
    // Ginibre draw + modified Gram-Schmidt, phases fixed by the construction.
    std::vector<CVec> cols(static_cast<std::size_t>(dim), CVec(static_cast<std::size_t>(dim)));
    for (auto& col : cols)
        for (Cx& z : col) z = rng.complex_gaussian();
    for (int c = 0; c < dim; ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int p = 0; p < c; ++p) {
                Cx ip = 0;
                for (int r = 0; r < dim; ++r) ip += std::conj(cols[static_cast<std::size_t>(p)][static_cast<std::size_t>(r)]) * cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
                for (int r = 0; r < dim; ++r) cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] -= ip * cols[static_cast<std::size_t>(p)][static_cast<std::size_t>(r)];
            }
        }
        cols[static_cast<std::size_t>(c)] = normalized(cols[static_cast<std::size_t>(c)]);
    }
    ComplexMatrix u(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) u.at(r, c) = cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
    return u;
}

DensityMatrix random_density(int dim, Rng& rng, int rank) {
    const int k = (rank <= 0 || rank > dim) ? dim : rank;
    ComplexMatrix g(dim, k);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < k; ++c) g.at(r, c) = rng.complex_gaussian();
    ComplexMatrix m = g * g.adjoint();
    const double t = m.trace().real();
    m *= Cx(1.0 / t, 0);
    // symmetrize to kill roundoff drift
    ComplexMatrix h(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) h.at(r, c) = 0.5 * (m.at(r, c) + std::conj(m.at(c, r)));
    return DensityMatrix::trusted(std::move(h), SpaceShape::single(dim));
}

}  // namespace qmc
