#ifndef CRANE_SPECTRAL_HPP
#define CRANE_SPECTRAL_HPP

// Spectrum of the discrete generator, the dissipativity certificate, the
// reduced boundary-value resolvent and the resolvent-norm sweep on iR.
//
// Norms are those of the weighted inner product: with G = L L^T every matrix
// is taken to the frame w = L^T s, where the Gram norm is the Euclidean norm.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "crane/discretize.hpp"

namespace crane {

using cplx = std::complex<double>;

/// Half the grid bandwidth: 0.5 N min(sqrt(a0), 1/tau).
inline double resolution_cutoff(const CraneModel& model, const Grid& grid)
{
    return 0.5 * grid.N * std::min(std::sqrt(model.coefficient.lower_bound()), 1.0 / model.gains.tau);
}

/// A matrix in the frame where the Gram norm is Euclidean, and the change of frame.
struct GramFrame {
    Eigen::MatrixXd A_hat;  // L^T A L^{-T}
    Eigen::MatrixXd L;      // lower Cholesky factor of the Gram matrix
};

inline GramFrame to_gram_frame(const Eigen::MatrixXd& A, const Eigen::MatrixXd& G)
{
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("Gram matrix is not positive definite");
    GramFrame f;
    f.L = llt.matrixL();
    const Eigen::MatrixXd B = f.L.transpose() * A;
    // B L^{-T} = (L^{-1} B^T)^T
    f.A_hat = f.L.triangularView<Eigen::Lower>().solve(B.transpose()).transpose();
    return f;
}

/// Generator restricted to compatible states with ell = 0. Coordinates are the
/// reduced ones without y_0, which the constraint fixes.
struct DotSpace {
    Eigen::MatrixXd V;      // reduced coordinates of the basis, nr x (nr - 1)
    Eigen::MatrixXd A;      // restricted generator in the basis
    Eigen::MatrixXd G;      // Gram matrix in the basis
    GramFrame frame;
};

inline DotSpace dot_space(const DiscreteOperator& op)
{
    const auto& g = op.grid();
    const int nr = op.reduced_size();
    const auto& l = op.reduced_ell();
    const int drop = g.ry(0);
    DotSpace d;
    d.V = Eigen::MatrixXd::Zero(nr, nr - 1);
    std::vector<int> keep;
    keep.reserve(nr - 1);
    for (int i = 0, c = 0; i < nr; ++i) {
        if (i == drop)
            continue;
        d.V(i, c) = 1.0;
        d.V(drop, c) = -l(i) / l(drop);
        keep.push_back(i);
        ++c;
    }
    const Eigen::MatrixXd AV = op.reduced_A() * d.V;
    d.A.resize(nr - 1, nr - 1);
    for (int c = 0; c < nr - 1; ++c)
        d.A.row(c) = AV.row(keep[c]);
    d.G = d.V.transpose() * op.reduced_G() * d.V;
    d.frame = to_gram_frame(d.A, d.G);
    return d;
}

struct SpectrumReport {
    std::vector<cplx> eigenvalues;
    bool restricted = false;
    int dimension = 0;
    /// eigenvalues with |lambda| <= zero_tol
    int zero_count = 0;
    double zero_tol = 1e-10;
    /// |A (1_y, 0, 0, 0, 0)|_inf
    double zero_mode_error = 0.0;
    /// sine of the angle between the computed null eigenvector and (1_y, 0, 0, 0, 0)
    double zero_vector_error = std::numeric_limits<double>::quiet_NaN();
    double max_re_nonzero = -std::numeric_limits<double>::infinity();
    double min_abs_re_nonzero = std::numeric_limits<double>::infinity();
    /// min |Re| over the restricted spectrum (only when restricted)
    double imaginary_axis_gap = std::numeric_limits<double>::quiet_NaN();
    /// max distance from each eigenvalue to the conjugate of its nearest partner
    double conjugate_pairing_error = 0.0;

    /// min |Re lambda| over nonzero eigenvalues with |Im lambda| <= gamma_max
    double band_gap(double gamma_max) const
    {
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& l : eigenvalues)
            if (std::abs(l) > zero_tol && std::abs(l.imag()) <= gamma_max)
                gap = std::min(gap, std::abs(l.real()));
        return gap;
    }
};

namespace detail {

inline double pairing_error(const std::vector<cplx>& ev)
{
    double err = 0.0;
    for (const auto& l : ev) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : ev)
            best = std::min(best, std::abs(m - std::conj(l)));
        err = std::max(err, best / (1.0 + std::abs(l)));
    }
    return err;
}

}  // namespace detail

/// Eigenvalues of the generator (restrict_dot = false, full stacked space) or of its
/// restriction to compatible states in ker(ell).
inline SpectrumReport eigenvalues(const DiscreteOperator& op, bool restrict_dot, double zero_tol = 1e-10)
{
    SpectrumReport rep;
    rep.restricted = restrict_dot;
    rep.zero_tol = zero_tol;
    const auto& g = op.grid();

    Eigen::VectorXd ones_y = Eigen::VectorXd::Zero(op.size());
    for (int j = 0; j <= g.N; ++j)
        ones_y(g.y(j)) = 1.0;
    rep.zero_mode_error = (op.A() * ones_y).cwiseAbs().maxCoeff();

    if (restrict_dot) {
        const DotSpace d = dot_space(op);
        Eigen::EigenSolver<Eigen::MatrixXd> es(d.frame.A_hat, false);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigensolver did not converge");
        const auto& ev = es.eigenvalues();
        rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    } else {
        const GramFrame f = to_gram_frame(op.A(), op.G());
        Eigen::EigenSolver<Eigen::MatrixXd> es(f.A_hat, true);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigensolver did not converge");
        const auto& ev = es.eigenvalues();
        rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
        Eigen::Index i0 = 0;
        ev.cwiseAbs().minCoeff(&i0);
        // back to stacked coordinates: s = L^{-T} w
        const Eigen::VectorXcd w = es.eigenvectors().col(i0);
        const auto LT = f.L.transpose().triangularView<Eigen::Upper>();
        const Eigen::VectorXd sr = LT.solve(w.real());
        const Eigen::VectorXd si = LT.solve(w.imag());
        Eigen::VectorXcd s(sr.size());
        s.real() = sr;
        s.imag() = si;
        const Eigen::VectorXcd e = ones_y.cast<cplx>() / ones_y.norm();
        const Eigen::VectorXcd off = s - e * e.dot(s);
        rep.zero_vector_error = off.norm() / s.norm();
    }
    rep.dimension = static_cast<int>(rep.eigenvalues.size());

    for (const auto& l : rep.eigenvalues) {
        if (std::abs(l) <= zero_tol) {
            ++rep.zero_count;
            continue;
        }
        rep.max_re_nonzero = std::max(rep.max_re_nonzero, l.real());
        rep.min_abs_re_nonzero = std::min(rep.min_abs_re_nonzero, std::abs(l.real()));
    }
    if (restrict_dot) {
        rep.imaginary_axis_gap = std::numeric_limits<double>::infinity();
        for (const auto& l : rep.eigenvalues)
            rep.imaginary_axis_gap = std::min(rep.imaginary_axis_gap, std::abs(l.real()));
    }
    rep.conjugate_pairing_error = detail::pairing_error(rep.eigenvalues);
    return rep;
}

struct DissipativityReport {
    int samples = 0;
    /// max over samples of [s^T G A s - bound] / |s|_G^2
    double max_relative_residual = -std::numeric_limits<double>::infinity();
    double max_residual = -std::numeric_limits<double>::infinity();
    double tolerance = 1e-8;
    bool passed = false;
};

/// Right side of the dissipation inequality for a compatible state.
inline double dissipation_bound(const CraneModel& model, double xi, double u1)
{
    const auto& k = model.gains;
    const double a = std::abs(k.alpha);
    return (-k.beta + 0.5 * (k.K + a)) * xi * xi + 0.5 * (a - k.K) * u1 * u1;
}

/// <A s, s>_G against the bound on random compatible states with standard normal
/// reduced coordinates.
inline DissipativityReport dissipativity_check(const DiscreteOperator& op, int n_samples, std::uint64_t seed,
                                               double tol = 1e-8)
{
    const auto& g = op.grid();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    DissipativityReport rep;
    rep.samples = n_samples;
    rep.tolerance = tol;
    const Eigen::MatrixXd GA = op.G() * op.A();
    Eigen::VectorXd r(op.reduced_size());
    for (int i = 0; i < n_samples; ++i) {
        for (Eigen::Index j = 0; j < r.size(); ++j)
            r(j) = normal(rng);
        const Eigen::VectorXd s = op.embed(r);
        const double lhs = s.dot(GA * s);
        const double res = lhs - dissipation_bound(op.model(), s(g.xi()), s(g.u(g.Nd)));
        const double n2 = s.dot(op.G() * s);
        rep.max_residual = std::max(rep.max_residual, res);
        rep.max_relative_residual = std::max(rep.max_relative_residual, res / n2);
    }
    rep.passed = n_samples > 0 && rep.max_relative_residual <= tol;
    return rep;
}

/// Solves (lambda - A) s = rhs through the two-point boundary-value problem for the
/// displacement: z = lambda y - f, the delay variable from the discrete transport
/// kernel kappa = (1 - lambda tau hd / 2) / (1 + lambda tau hd / 2) (kappa^Nd stands
/// in for exp(-lambda tau)), and a tridiagonal system for y. Does not use the
/// assembled matrices.
inline CraneState resolvent_solve_reduced(const CraneModel& model, const Grid& grid, double lambda,
                                          const CraneState& rhs)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("reduced resolvent needs lambda > 0");
    grid.check();
    if (!rhs.same_grid(grid))
        throw std::invalid_argument("reduced resolvent: right-hand side does not match grid");
    const auto& k = model.gains;
    const auto& p = model.physical;
    const int N = grid.N, Nd = grid.Nd;
    const auto mesh = std::make_shared<const CableMesh>(CableMesh::make(model.coefficient, grid));
    const Eigen::VectorXd c = mesh->cell_coefficients(model.coefficient).cwiseQuotient(mesh->cell);
    const Eigen::VectorXd& w = mesh->weight;
    const double nu = grid.viscosity_coefficient();
    const double hd = grid.hd();
    const double mm = p.m + w(0), MM = p.M + w(N);
    const double sigma = 2.0 * Nd / k.tau;

    // merged platform and load values of the right-hand side
    const double wp = w(0) + p.m + 0.5 * k.alpha * k.tau * hd;
    const double pm = (w(0) * rhs.z(0) + p.m * rhs.xi + 0.5 * k.alpha * k.tau * hd * rhs.u(0)) / wp;
    const double qm = (w(N) * rhs.z(N) + p.M * rhs.eta) / MM;
    const Eigen::VectorXd& f = rhs.y;

    auto S = [&](const Eigen::VectorXd& v, int j) {
        double acc = 0.0;
        if (j > 0)
            acc += c(j - 1) * (v(j) - v(j - 1));
        if (j < N)
            acc += c(j) * (v(j) - v(j + 1));
        return acc;
    };

    // delay recursion u_k = kappa u_{k-1} + b_k / (lambda/2 + 1/(tau hd)), u_0 = xi
    const double cu = 1.0 / (k.tau * hd);
    const double kappa = (cu - 0.5 * lambda) / (cu + 0.5 * lambda);
    double Wsum = 0.0;
    for (int kk = 1; kk <= Nd; ++kk) {
        const double vprev = kk == 1 ? pm : rhs.u(kk - 1);
        Wsum = kappa * Wsum + 0.5 * (rhs.u(kk) + vprev) / (0.5 * lambda + cu);
    }
    const double kN = std::pow(kappa, Nd);
    const double D0 = mm * lambda + k.beta - k.alpha * kN;
    const double s1 = 1.0 + nu * lambda;

    Eigen::VectorXd lo = Eigen::VectorXd::Zero(N + 1), di(N + 1), up = Eigen::VectorXd::Zero(N + 1), b(N + 1);
    di(0) = lambda * D0 + s1 * c(0);
    up(0) = -s1 * c(0);
    b(0) = mm * pm + D0 * f(0) + k.alpha * Wsum + nu * S(f, 0);
    for (int j = 1; j < N; ++j) {
        lo(j) = -s1 * c(j - 1);
        up(j) = -s1 * c(j);
        di(j) = lambda * lambda * w(j) + s1 * (c(j - 1) + c(j));
        b(j) = w(j) * (rhs.z(j) + lambda * f(j)) + nu * S(f, j);
    }
    lo(N) = -s1 * c(N - 1);
    di(N) = lambda * lambda * MM + s1 * c(N - 1);
    b(N) = MM * (qm + lambda * f(N)) + nu * S(f, N);

    // Thomas algorithm
    for (int j = 1; j <= N; ++j) {
        const double m = lo(j) / di(j - 1);
        di(j) -= m * up(j - 1);
        b(j) -= m * b(j - 1);
    }
    Eigen::VectorXd y(N + 1);
    y(N) = b(N) / di(N);
    for (int j = N - 1; j >= 0; --j)
        y(j) = (b(j) - up(j) * y(j + 1)) / di(j);
    if (!y.allFinite())
        throw std::runtime_error("reduced resolvent: singular system");

    auto s = CraneState::zeros(mesh, Nd);
    s.y = y;
    s.z = lambda * y - f;
    s.xi = s.z(0);
    s.eta = s.z(N);
    s.u(0) = s.xi;
    for (int kk = 1; kk <= Nd; ++kk) {
        const double vprev = kk == 1 ? pm : rhs.u(kk - 1);
        s.u(kk) = kappa * s.u(kk - 1) + 0.5 * (rhs.u(kk) + vprev) / (0.5 * lambda + cu);
    }
    // incompatible part of the right-hand side relaxes at rate sigma
    const double inv = 1.0 / (lambda + sigma);
    s.z(0) += (rhs.z(0) - pm) * inv;
    s.u(0) += (rhs.u(0) - pm) * inv;
    s.xi += (rhs.xi - pm) * inv;
    s.z(N) += (rhs.z(N) - qm) * inv;
    s.eta += (rhs.eta - qm) * inv;
    return s;
}

/// (lambda - A)^{-1} rhs by a dense LU solve of the assembled matrix.
inline CraneState resolvent_solve_direct(const DiscreteOperator& op, double lambda, const CraneState& rhs)
{
    const int n = op.size();
    const Eigen::MatrixXd B = lambda * Eigen::MatrixXd::Identity(n, n) - op.A();
    const Eigen::VectorXd s = B.partialPivLu().solve(rhs.stacked());
    return CraneState::from_stacked(op.mesh(), op.grid().Nd, s);
}

namespace detail {

/// LU with adjacent-row pivoting of an upper Hessenberg matrix; O(n^2) per factorization and solve.
class HessenbergLU {
public:
    explicit HessenbergLU(Eigen::MatrixXcd H) : U_(std::move(H))
    {
        const auto n = U_.rows();
        l_.resize(n > 0 ? n - 1 : 0);
        swap_.assign(n > 0 ? n - 1 : 0, false);
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            if (std::abs(U_(k + 1, k)) > std::abs(U_(k, k))) {
                U_.row(k).tail(n - k).swap(U_.row(k + 1).tail(n - k));
                swap_[k] = true;
            }
            if (U_(k, k) == cplx(0.0))
                throw std::runtime_error("Hessenberg LU: singular matrix");
            const cplx l = U_(k + 1, k) / U_(k, k);
            l_(k) = l;
            U_.row(k + 1).tail(n - k) -= l * U_.row(k).tail(n - k);
            U_(k + 1, k) = 0.0;
        }
        if (n > 0 && U_(n - 1, n - 1) == cplx(0.0))
            throw std::runtime_error("Hessenberg LU: singular matrix");
    }

    /// H x = b
    Eigen::VectorXcd solve(Eigen::VectorXcd b) const
    {
        for (Eigen::Index k = 0; k < l_.size(); ++k) {
            if (swap_[k])
                std::swap(b(k), b(k + 1));
            b(k + 1) -= l_(k) * b(k);
        }
        return U_.triangularView<Eigen::Upper>().solve(b);
    }

    /// H^* x = b
    Eigen::VectorXcd solve_adjoint(const Eigen::VectorXcd& b) const
    {
        Eigen::VectorXcd x = U_.adjoint().triangularView<Eigen::Lower>().solve(b);
        for (Eigen::Index k = l_.size() - 1; k >= 0; --k) {
            x(k) -= std::conj(l_(k)) * x(k + 1);
            if (swap_[k])
                std::swap(x(k), x(k + 1));
        }
        return x;
    }

private:
    Eigen::MatrixXcd U_;
    Eigen::VectorXcd l_;
    std::vector<bool> swap_;
};

/// Largest eigenvalue of (B^* B)^{-1} by Lanczos with full reorthogonalization.
inline double inverse_gram_top(const HessenbergLU& lu, Eigen::Index n, std::uint64_t seed = 7)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXcd q(n);
    for (Eigen::Index i = 0; i < n; ++i)
        q(i) = cplx(normal(rng), normal(rng));
    q.normalize();
    const Eigen::Index maxit = std::min<Eigen::Index>(n, 160);
    Eigen::MatrixXcd Q(n, maxit);
    std::vector<double> alpha, beta;
    double prev = 0.0;
    for (Eigen::Index j = 0; j < maxit; ++j) {
        Q.col(j) = q;
        Eigen::VectorXcd v = lu.solve(lu.solve_adjoint(q));
        const double a = q.dot(v).real();
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            v -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).adjoint() * v);
        const double b = v.norm();
        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m)
                T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const double top = es.eigenvalues()(m - 1);
        const double resid = b * std::abs(es.eigenvectors()(m - 1, m - 1));
        if ((j >= 4 && resid <= 1e-12 * top && std::abs(top - prev) <= 1e-13 * top) || b <= 1e-300 || j + 1 == maxit)
            return top;
        prev = top;
        beta.push_back(b);
        q = v / b;
    }
    return prev;
}

}  // namespace detail

struct ResolventSweep {
    std::vector<double> gammas;
    std::vector<double> norms;
    std::vector<double> scaled;  // norm / gamma^2
    std::vector<double> excluded;
    std::vector<std::string> warnings;
    double gamma_max_resolved = 0.0;
    double sup_scaled = 0.0;
    double gamma_at_sup = 0.0;
};

/// Log-spaced sample points in [lo, hi].
inline std::vector<double> log_gammas(double lo, double hi, int n)
{
    if (!(lo > 0.0) || !(hi >= lo) || n < 1)
        throw std::invalid_argument("gamma range must satisfy 0 < lo <= hi, n >= 1");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

/// Evaluates |(i gamma - A_dot)^{-1}| in the Gram norm of the restricted space
/// through one Hessenberg reduction of the Gram-frame matrix.
class ResolventNorm {
public:
    explicit ResolventNorm(const DiscreteOperator& op)
    {
        const DotSpace d = dot_space(op);
        Eigen::HessenbergDecomposition<Eigen::MatrixXd> hd(d.frame.A_hat);
        H_ = hd.matrixH();
    }

    explicit ResolventNorm(const Eigen::MatrixXd& A_hat)
    {
        Eigen::HessenbergDecomposition<Eigen::MatrixXd> hd(A_hat);
        H_ = hd.matrixH();
    }

    double operator()(double gamma) const
    {
        const auto n = H_.rows();
        Eigen::MatrixXcd B = -H_.cast<cplx>();
        B.diagonal().array() += cplx(0.0, gamma);
        const detail::HessenbergLU lu(std::move(B));
        return std::sqrt(detail::inverse_gram_top(lu, n));
    }

    Eigen::Index size() const { return H_.rows(); }

private:
    Eigen::MatrixXd H_;
};

inline ResolventSweep resolvent_sweep(const DiscreteOperator& op, const std::vector<double>& gammas, int jobs = 1)
{
    ResolventSweep sw;
    sw.gamma_max_resolved = resolution_cutoff(op.model(), op.grid());
    for (double g : gammas) {
        if (!(g > 0.0))
            throw std::invalid_argument("resolvent sweep: gammas must be positive");
        if (g > sw.gamma_max_resolved * (1.0 + 1e-12)) {
            sw.excluded.push_back(g);
            sw.warnings.push_back("gamma " + std::to_string(g) + " beyond resolution cutoff " +
                                  std::to_string(sw.gamma_max_resolved) + ", excluded");
        } else {
            sw.gammas.push_back(g);
        }
    }
    std::sort(sw.gammas.begin(), sw.gammas.end());
    sw.gammas.erase(std::unique(sw.gammas.begin(), sw.gammas.end()), sw.gammas.end());
    const ResolventNorm rn(op);
    sw.norms.assign(sw.gammas.size(), 0.0);
    const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(sw.gammas.size())));
    auto work = [&](int t) {
        for (std::size_t i = t; i < sw.gammas.size(); i += nthreads)
            sw.norms[i] = rn(sw.gammas[i]);
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back(work, t);
        for (auto& th : pool)
            th.join();
    }
    sw.scaled.resize(sw.gammas.size());
    for (std::size_t i = 0; i < sw.gammas.size(); ++i) {
        sw.scaled[i] = sw.norms[i] / (sw.gammas[i] * sw.gammas[i]);
        if (sw.scaled[i] > sw.sup_scaled) {
            sw.sup_scaled = sw.scaled[i];
            sw.gamma_at_sup = sw.gammas[i];
        }
    }
    return sw;
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumReport& r, const std::string& preamble = {})
{
    const auto old = os.precision(17);
    if (!preamble.empty())
        os << preamble << '\n';
    os << "re,im\n";
    for (const auto& l : r.eigenvalues)
        os << l.real() << ',' << l.imag() << '\n';
    os.precision(old);
}

inline void write_resolvent_csv(std::ostream& os, const ResolventSweep& s, const std::string& preamble = {})
{
    const auto old = os.precision(17);
    if (!preamble.empty())
        os << preamble << '\n';
    os << "gamma,norm,scaled\n";
    for (std::size_t i = 0; i < s.gammas.size(); ++i)
        os << s.gammas[i] << ',' << s.norms[i] << ',' << s.scaled[i] << '\n';
    os.precision(old);
}

namespace detail {
inline nlohmann::json finite_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}
}  // namespace detail

inline nlohmann::json to_json(const SpectrumReport& r)
{
    return {{"restricted", r.restricted},
            {"dimension", r.dimension},
            {"zero_count", r.zero_count},
            {"zero_tol", r.zero_tol},
            {"zero_mode_error", r.zero_mode_error},
            {"zero_vector_error", detail::finite_or_null(r.zero_vector_error)},
            {"max_re_nonzero", detail::finite_or_null(r.max_re_nonzero)},
            {"min_abs_re_nonzero", detail::finite_or_null(r.min_abs_re_nonzero)},
            {"imaginary_axis_gap", detail::finite_or_null(r.imaginary_axis_gap)},
            {"conjugate_pairing_error", r.conjugate_pairing_error}};
}

inline nlohmann::json to_json(const DissipativityReport& r)
{
    return {{"samples", r.samples},
            {"max_relative_residual", r.max_relative_residual},
            {"max_residual", r.max_residual},
            {"tolerance", r.tolerance},
            {"passed", r.passed}};
}

inline nlohmann::json to_json(const ResolventSweep& s)
{
    return {{"points", s.gammas.size()},
            {"gamma_min", s.gammas.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.gammas.front())},
            {"gamma_max", s.gammas.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.gammas.back())},
            {"gamma_max_resolved", s.gamma_max_resolved},
            {"sup_scaled", s.sup_scaled},
            {"gamma_at_sup", s.gamma_at_sup},
            {"excluded", s.excluded},
            {"warnings", s.warnings}};
}

}  // namespace crane

#endif
