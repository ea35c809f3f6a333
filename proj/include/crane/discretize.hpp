#ifndef CRANE_DISCRETIZE_HPP
#define CRANE_DISCRETIZE_HPP

// Finite-dimensional realization of the state space (y, z, u, xi, eta), the
// weighted inner product and the closed-loop generator.
//
// Cable nodes 0 = x_0 < ... < x_N = 1 (uniform or equal travel time), delay
// nodes s_k = k/Nd. The stacked ("full") state is
//   [ y_0..y_N | z_0..z_N | u_0..u_Nd | xi | eta ]          n = 2N + Nd + 5
// Compatible states satisfy z_0 = u_0 = xi and z_N = eta. They are represented
// without redundancy by the reduced coordinates
//   [ y_0..y_N | z_1..z_{N-1} | u_1..u_Nd | xi | eta ]      nr = 2N + Nd + 2
//
// The generator acts on reduced coordinates through a lumped-mass pencil
// M r' = K r: three-point flux form for (a y_x)_x with cell coefficients
// abar_j = (a(x_j) + a(x_{j+1}))/2, the platform and load masses merged with
// the half-cell lumped mass at the end nodes, and the box (cell-centered)
// scheme for tau u_t + u_x = 0 with inflow u_0 = xi. On the full space
//   A = E A_r R - sigma (I - E R)
// where E copies reduced values into the redundant slots and R merges a
// stacked state into reduced coordinates while preserving the conserved
// functional. Incompatible components relax at rate sigma = 2 Nd / tau.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crane/model.hpp"

namespace crane {

struct Grid {
    /// Cable node placement. travel_time places nodes at equal wave travel time,
    /// int_{x_j}^{x_{j+1}} a^{-1/2} dx = const, so the grid cutoff frequency is the
    /// same along the whole cable.
    enum class Spacing { travel_time, uniform };

    int N = 200;
    int Nd = 100;
    Spacing spacing = Spacing::uniform;
    /// theta in the grid-scale viscosity nu = theta / N^4 acting as -nu (a z_x)_x.
    double theta = 1.0;

    Grid() = default;
    Grid(int cable_cells, int delay_cells, Spacing sp = Spacing::uniform, double visc = 1.0)
        : N(cable_cells), Nd(delay_cells), spacing(sp), theta(visc)
    {
        check();
    }

    double viscosity_coefficient() const
    {
        const double n2 = static_cast<double>(N) * N;
        return theta / (n2 * n2);
    }

    void check() const
    {
        if (N < 2)
            throw std::invalid_argument("grid needs N >= 2 cable cells");
        if (Nd < 1)
            throw std::invalid_argument("grid needs Nd >= 1 delay cells");
        if (!(theta >= 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("grid viscosity theta must be finite and >= 0");
    }

    double hd() const { return 1.0 / Nd; }
    double s(int k) const { return static_cast<double>(k) / Nd; }

    int full_size() const { return 2 * N + Nd + 5; }
    int reduced_size() const { return 2 * N + Nd + 2; }

    // full layout
    int y(int j) const { return j; }
    int z(int j) const { return N + 1 + j; }
    int u(int k) const { return 2 * (N + 1) + k; }
    int xi() const { return 2 * (N + 1) + Nd + 1; }
    int eta() const { return xi() + 1; }

    // reduced layout
    int ry(int j) const { return j; }
    int rxi() const { return 2 * N + Nd; }
    int reta() const { return 2 * N + Nd + 1; }
    int rz(int j) const { return j == 0 ? rxi() : (j == N ? reta() : N + j); }
    int ru(int k) const { return k == 0 ? rxi() : 2 * N + k - 1; }

    bool operator==(const Grid& o) const
    {
        return N == o.N && Nd == o.Nd && spacing == o.spacing && theta == o.theta;
    }
};

inline const char* to_string(Grid::Spacing s) { return s == Grid::Spacing::uniform ? "uniform" : "travel_time"; }

/// Cable nodes with their cell lengths and trapezoidal weights.
struct CableMesh {
    Grid::Spacing spacing = Grid::Spacing::uniform;
    Eigen::VectorXd x;       // N+1 nodes, x_0 = 0, x_N = 1
    Eigen::VectorXd cell;    // N cell lengths
    Eigen::VectorXd weight;  // N+1 trapezoidal weights

    int N() const { return static_cast<int>(cell.size()); }

    static CableMesh from_nodes(Eigen::VectorXd nodes)
    {
        CableMesh m;
        const auto n = nodes.size() - 1;
        m.x = std::move(nodes);
        m.cell = m.x.tail(n) - m.x.head(n);
        m.weight = Eigen::VectorXd::Zero(n + 1);
        m.weight.head(n) += 0.5 * m.cell;
        m.weight.tail(n) += 0.5 * m.cell;
        return m;
    }

    static CableMesh uniform(int N)
    {
        return from_nodes(Eigen::VectorXd::LinSpaced(N + 1, 0.0, 1.0));
    }

    static CableMesh travel_time(const CableCoefficient& a, int N)
    {
        Eigen::VectorXd nodes(N + 1);
        if (a.kind() == CableCoefficient::Kind::affine) {
            // int_0^x (a0 + a1 s)^{-1/2} ds = 2 (sqrt(a(x)) - sqrt(a0)) / a1
            const double a0 = a.params()[0], a1 = a.params()[1];
            const double r0 = std::sqrt(a0), r1 = std::sqrt(a0 + a1);
            for (int j = 0; j <= N; ++j) {
                const double r = r0 + (r1 - r0) * j / N;
                nodes(j) = (r * r - a0) / a1;
            }
        } else {
            // cumulative travel time on a fine grid, inverted by linear interpolation
            const int fine = 64 * std::max(N, 64);
            Eigen::VectorXd t(fine + 1);
            t(0) = 0.0;
            double prev = 1.0 / std::sqrt(a(0.0));
            for (int i = 1; i <= fine; ++i) {
                const double cur = 1.0 / std::sqrt(a(static_cast<double>(i) / fine));
                t(i) = t(i - 1) + 0.5 * (prev + cur) / fine;
                prev = cur;
            }
            int i = 0;
            for (int j = 0; j <= N; ++j) {
                const double target = t(fine) * j / N;
                while (i < fine - 1 && t(i + 1) < target)
                    ++i;
                const double w = (target - t(i)) / (t(i + 1) - t(i));
                nodes(j) = (i + std::clamp(w, 0.0, 1.0)) / fine;
            }
        }
        nodes(0) = 0.0;
        nodes(N) = 1.0;
        return from_nodes(std::move(nodes));
    }

    static CableMesh make(const CableCoefficient& a, const Grid& g)
    {
        if (g.spacing == Grid::Spacing::uniform)
            return uniform(g.N);
        auto m = travel_time(a, g.N);
        m.spacing = Grid::Spacing::travel_time;
        return m;
    }

    double trapz(const Eigen::Ref<const Eigen::VectorXd>& v) const { return weight.dot(v); }

    double trapz_product(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const
    {
        return (weight.array() * a.array() * b.array()).sum();
    }

    /// sum_j abar_j (a_{j+1} - a_j)(b_{j+1} - b_j) / cell_j: trapezoidal rule for
    /// int a f_x g_x with f, g piecewise linear.
    double stiffness_product(const Eigen::Ref<const Eigen::VectorXd>& abar, const Eigen::Ref<const Eigen::VectorXd>& a,
                             const Eigen::Ref<const Eigen::VectorXd>& b) const
    {
        double acc = 0.0;
        for (int j = 0; j < N(); ++j)
            acc += abar(j) * (a(j + 1) - a(j)) * (b(j + 1) - b(j)) / cell(j);
        return acc;
    }

    /// Cell coefficients abar_j = (a(x_j) + a(x_{j+1}))/2.
    Eigen::VectorXd cell_coefficients(const CableCoefficient& a) const
    {
        Eigen::VectorXd abar(N());
        for (int j = 0; j < N(); ++j)
            abar(j) = 0.5 * (a(x(j)) + a(x(j + 1)));
        return abar;
    }
};

/// Nodal snapshot of (y, z, u, xi, eta) on a cable mesh and a uniform delay grid.
struct CraneState {
    std::shared_ptr<const CableMesh> mesh;
    Eigen::VectorXd y;
    Eigen::VectorXd z;
    Eigen::VectorXd u;
    double xi = 0.0;
    double eta = 0.0;

    static CraneState zeros(std::shared_ptr<const CableMesh> mesh, int Nd)
    {
        if (!mesh)
            throw std::invalid_argument("state needs a cable mesh");
        CraneState s;
        const int N = mesh->N();
        s.mesh = std::move(mesh);
        s.y = Eigen::VectorXd::Zero(N + 1);
        s.z = Eigen::VectorXd::Zero(N + 1);
        s.u = Eigen::VectorXd::Zero(Nd + 1);
        return s;
    }

    static CraneState zeros(const CraneModel& model, const Grid& g)
    {
        g.check();
        return zeros(std::make_shared<const CableMesh>(CableMesh::make(model.coefficient, g)), g.Nd);
    }

    /// (c, 0, 0, 0, 0)
    static CraneState constant(std::shared_ptr<const CableMesh> mesh, int Nd, double c)
    {
        auto s = zeros(std::move(mesh), Nd);
        s.y.setConstant(c);
        return s;
    }

    Grid grid() const
    {
        return Grid(static_cast<int>(y.size()) - 1, static_cast<int>(u.size()) - 1,
                    mesh ? mesh->spacing : Grid::Spacing::uniform);
    }

    bool same_grid(const Grid& g) const
    {
        return y.size() == g.N + 1 && z.size() == g.N + 1 && u.size() == g.Nd + 1;
    }

    /// Discrete domain of the generator: xi = z(0) = u(0), eta = z(1).
    bool in_domain(double tol = 1e-12) const
    {
        const double scale = 1.0 + std::abs(xi) + std::abs(eta);
        return std::abs(z(0) - xi) <= tol * scale && std::abs(u(0) - xi) <= tol * scale &&
               std::abs(z(z.size() - 1) - eta) <= tol * scale;
    }

    Eigen::VectorXd stacked() const
    {
        const Grid g = grid();
        Eigen::VectorXd v(g.full_size());
        v.segment(g.y(0), g.N + 1) = y;
        v.segment(g.z(0), g.N + 1) = z;
        v.segment(g.u(0), g.Nd + 1) = u;
        v(g.xi()) = xi;
        v(g.eta()) = eta;
        return v;
    }

    static CraneState from_stacked(std::shared_ptr<const CableMesh> mesh, int Nd,
                                   const Eigen::Ref<const Eigen::VectorXd>& v)
    {
        auto s = zeros(std::move(mesh), Nd);
        const Grid g(s.mesh->N(), Nd);
        if (v.size() != g.full_size())
            throw std::invalid_argument("stacked vector does not match grid");
        s.y = v.segment(g.y(0), g.N + 1);
        s.z = v.segment(g.z(0), g.N + 1);
        s.u = v.segment(g.u(0), g.Nd + 1);
        s.xi = v(g.xi());
        s.eta = v(g.eta());
        return s;
    }
};

namespace quad {

/// Trapezoidal rule on a uniform grid over [0,1].
inline double trapz(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    const auto n = v.size() - 1;
    return (v.sum() - 0.5 * (v(0) + v(n))) / static_cast<double>(n);
}

/// L2 product of cell averages on a uniform grid, the quadrature matched to the box transport scheme.
inline double cell_product(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b)
{
    const auto n = a.size() - 1;
    double acc = 0.0;
    for (Eigen::Index k = 1; k <= n; ++k)
        acc += 0.25 * (a(k) + a(k - 1)) * (b(k) + b(k - 1));
    return acc / static_cast<double>(n);
}

}  // namespace quad

inline const CableMesh& mesh_of(const CraneState& s)
{
    if (!s.mesh || s.mesh->N() + 1 != s.y.size())
        throw std::invalid_argument("state has no matching cable mesh");
    return *s.mesh;
}

/// Conserved functional int z + alpha tau int u + (beta - alpha) y(0) + m xi + M eta.
inline double conserved_functional(const CraneState& s, const CraneModel& model)
{
    const auto& k = model.gains;
    return mesh_of(s).trapz(s.z) + k.alpha * k.tau * quad::trapz(s.u) + k.mu() * s.y(0) + model.physical.m * s.xi +
           model.physical.M * s.eta;
}

class DiscreteOperator {
public:
    using SparseMatrix = Eigen::SparseMatrix<double>;

    DiscreteOperator(const CraneModel& model, const Grid& grid, bool strict = true) : model_(model), grid_(grid)
    {
        grid_.check();
        if (strict)
            require_strict(model_);
        const auto& k = model_.gains;
        const auto& p = model_.physical;
        if (!(k.mu() > 0.0) || !(k.tau > 0.0) || !(p.m > 0.0) || !(p.M > 0.0))
            throw ModelError("cannot assemble: need beta > alpha, tau > 0, m > 0, M > 0");
        mesh_ = std::make_shared<const CableMesh>(CableMesh::make(model_.coefficient, grid_));
        hd_ = grid_.hd();
        abar_ = mesh_->cell_coefficients(model_.coefficient);
        w0_ = mesh_->weight(0);
        wN_ = mesh_->weight(grid_.N);
        platform_mass_ = p.m + w0_;
        load_mass_ = p.M + wN_;
        merge_weight_ = w0_ + p.m + 0.5 * k.alpha * k.tau * hd_;
        if (!(merge_weight_ > 0.0))
            throw std::invalid_argument("grid too small: delay grid too coarse for the merged platform weight");
        relaxation_rate_ = 2.0 * grid_.Nd / k.tau;
        viscosity_ = grid_.viscosity_coefficient();
        penalty_ = 0.5 * k.K * k.tau * hd_;

        build_pencil();
        build_reduced_generator();
        build_embedding();
        build_full_generator();
        build_functional();
        build_gram();
        check_assembly();
    }

    const CraneModel& model() const { return model_; }
    const Grid& grid() const { return grid_; }
    int size() const { return grid_.full_size(); }
    int reduced_size() const { return grid_.reduced_size(); }
    const std::shared_ptr<const CableMesh>& mesh() const { return mesh_; }
    CraneState zeros() const { return CraneState::zeros(mesh_, grid_.Nd); }
    CraneState constant(double c) const { return CraneState::constant(mesh_, grid_.Nd, c); }

    /// Generator on stacked coordinates.
    const Eigen::MatrixXd& A() const { return A_; }
    /// Gram matrix of the weighted inner product on stacked coordinates.
    const Eigen::MatrixXd& G() const { return G_; }
    /// Row vector of the conserved functional.
    const Eigen::RowVectorXd& ell() const { return ell_; }
    /// Projector onto ker(ell) along the constant-displacement direction.
    const Eigen::MatrixXd& P() const { return P_; }

    const Eigen::MatrixXd& reduced_A() const { return A_r_; }
    const Eigen::MatrixXd& reduced_G() const { return G_r_; }
    const Eigen::RowVectorXd& reduced_ell() const { return ell_r_; }
    /// Gram matrix of the plain H1 x L2 x L2 x R^2 norm, reduced coordinates.
    const Eigen::MatrixXd& reduced_standard_gram() const { return S_r_; }
    const SparseMatrix& mass() const { return M_r_; }
    const SparseMatrix& stiffness() const { return K_r_; }
    const SparseMatrix& embedding() const { return E_; }
    const SparseMatrix& merge() const { return R_; }

    const Eigen::VectorXd& cell_coefficients() const { return abar_; }
    double platform_mass() const { return platform_mass_; }
    double load_mass() const { return load_mass_; }
    double relaxation_rate() const { return relaxation_rate_; }
    double penalty_weight() const { return penalty_; }
    /// Kelvin-Voigt coefficient nu of the grid-scale viscosity.
    double viscosity() const { return viscosity_; }

    /// max |(ell A)_j| relative to max_j sum_i |ell_i A_ij|
    double ell_A_residual() const { return ell_A_residual_; }

    /// Matched time step tau / Nd.
    double matched_dt() const { return model_.gains.tau / grid_.Nd; }

    Eigen::VectorXd embed(const Eigen::Ref<const Eigen::VectorXd>& r) const { return E_ * r; }
    Eigen::VectorXd reduce(const Eigen::Ref<const Eigen::VectorXd>& s) const { return R_ * s; }
    CraneState state_from_reduced(const Eigen::Ref<const Eigen::VectorXd>& r) const
    {
        return CraneState::from_stacked(mesh_, grid_.Nd, E_ * r);
    }

    Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& s) const { return A_ * s; }

    /// s1^T G s2 evaluated by quadrature (no dense product).
    double inner_product(const CraneState& a, const CraneState& b) const
    {
        if (!a.same_grid(grid_) || !b.same_grid(grid_))
            throw std::invalid_argument("inner product: state does not match operator grid");
        const auto& k = model_.gains;
        const auto& p = model_.physical;
        const auto& mh = *mesh_;
        double v = mh.stiffness_product(abar_, a.y, b.y) + mh.trapz_product(a.z, b.z) +
                   k.K * k.tau * quad::cell_product(a.u, b.u) + p.m * a.xi * b.xi + p.M * a.eta * b.eta +
                   penalty_ * (a.u(0) - a.xi) * (b.u(0) - b.xi);
        return v + model_.weights.varpi * conserved_functional(a, model_) * conserved_functional(b, model_);
    }

    double gram_norm(const CraneState& s) const { return std::sqrt(std::max(0.0, inner_product(s, s))); }

private:
    void build_pencil()
    {
        const auto& g = grid_;
        const auto& k = model_.gains;
        const int nr = g.reduced_size();
        std::vector<Eigen::Triplet<double>> mt, kt;
        mt.reserve(4 * nr);
        kt.reserve(6 * nr);
        // y_j' = z_j
        for (int j = 0; j <= g.N; ++j) {
            mt.emplace_back(g.ry(j), g.ry(j), 1.0);
            kt.emplace_back(g.ry(j), g.rz(j), 1.0);
        }
        // flux coefficients abar_j / h_j; the end rows rz(0), rz(N) are the mass equations
        const Eigen::VectorXd c = abar_.cwiseQuotient(mesh_->cell);
        for (int j = 1; j < g.N; ++j)
            mt.emplace_back(g.rz(j), g.rz(j), mesh_->weight(j));
        mt.emplace_back(g.rxi(), g.rxi(), platform_mass_);
        mt.emplace_back(g.reta(), g.reta(), load_mass_);
        // w_j z_j' = -(S y)_j - nu (S z)_j
        for (int j = 0; j < g.N; ++j) {
            const int lo = g.rz(j), hi = g.rz(j + 1);
            for (auto [row, sign] : {std::pair{lo, 1.0}, std::pair{hi, -1.0}}) {
                kt.emplace_back(row, g.ry(j + 1), sign * c(j));
                kt.emplace_back(row, g.ry(j), -sign * c(j));
                if (viscosity_ > 0.0) {
                    kt.emplace_back(row, hi, sign * viscosity_ * c(j));
                    kt.emplace_back(row, lo, -sign * viscosity_ * c(j));
                }
            }
        }
        // platform: - beta xi + alpha u_Nd
        kt.emplace_back(g.rxi(), g.rxi(), -k.beta);
        kt.emplace_back(g.rxi(), g.ru(g.Nd), k.alpha);
        // (u_k' + u_{k-1}')/2 = -(u_k - u_{k-1})/(tau hd), u_0 = xi
        const double ct = 1.0 / (k.tau * hd_);
        for (int kk = 1; kk <= g.Nd; ++kk) {
            const int row = g.ru(kk);
            mt.emplace_back(row, g.ru(kk), 0.5);
            mt.emplace_back(row, g.ru(kk - 1), 0.5);
            kt.emplace_back(row, g.ru(kk), -ct);
            kt.emplace_back(row, g.ru(kk - 1), ct);
        }
        M_r_.resize(nr, nr);
        K_r_.resize(nr, nr);
        M_r_.setFromTriplets(mt.begin(), mt.end());
        K_r_.setFromTriplets(kt.begin(), kt.end());
    }

    void build_reduced_generator()
    {
        const auto& g = grid_;
        const int nr = g.reduced_size();
        const Eigen::MatrixXd K = Eigen::MatrixXd(K_r_);
        A_r_ = Eigen::MatrixXd::Zero(nr, nr);
        for (int j = 0; j <= g.N; ++j)
            A_r_.row(g.ry(j)) = K.row(g.ry(j));
        for (int j = 1; j < g.N; ++j)
            A_r_.row(g.rz(j)) = K.row(g.rz(j)) / mesh_->weight(j);
        A_r_.row(g.rxi()) = K.row(g.rxi()) / platform_mass_;
        A_r_.row(g.reta()) = K.row(g.reta()) / load_mass_;
        // u_k' = -u_{k-1}' + 2 (K row)
        Eigen::RowVectorXd prev = A_r_.row(g.rxi());
        for (int kk = 1; kk <= g.Nd; ++kk) {
            Eigen::RowVectorXd row = -prev + 2.0 * K.row(g.ru(kk));
            A_r_.row(g.ru(kk)) = row;
            prev = row;
        }
    }

    void build_embedding()
    {
        const auto& g = grid_;
        const auto& k = model_.gains;
        const auto& p = model_.physical;
        std::vector<Eigen::Triplet<double>> et, rt;
        for (int j = 0; j <= g.N; ++j) {
            et.emplace_back(g.y(j), g.ry(j), 1.0);
            et.emplace_back(g.z(j), g.rz(j), 1.0);
            rt.emplace_back(g.ry(j), g.y(j), 1.0);
        }
        for (int kk = 0; kk <= g.Nd; ++kk)
            et.emplace_back(g.u(kk), g.ru(kk), 1.0);
        et.emplace_back(g.xi(), g.rxi(), 1.0);
        et.emplace_back(g.eta(), g.reta(), 1.0);

        for (int j = 1; j < g.N; ++j)
            rt.emplace_back(g.rz(j), g.z(j), 1.0);
        for (int kk = 1; kk <= g.Nd; ++kk)
            rt.emplace_back(g.ru(kk), g.u(kk), 1.0);
        // momentum-weighted merge of the platform slots and of the load slots
        rt.emplace_back(g.rxi(), g.z(0), w0_ / merge_weight_);
        rt.emplace_back(g.rxi(), g.xi(), p.m / merge_weight_);
        rt.emplace_back(g.rxi(), g.u(0), 0.5 * k.alpha * k.tau * hd_ / merge_weight_);
        rt.emplace_back(g.reta(), g.z(g.N), wN_ / load_mass_);
        rt.emplace_back(g.reta(), g.eta(), p.M / load_mass_);

        E_.resize(g.full_size(), g.reduced_size());
        R_.resize(g.reduced_size(), g.full_size());
        E_.setFromTriplets(et.begin(), et.end());
        R_.setFromTriplets(rt.begin(), rt.end());
    }

    void build_full_generator()
    {
        const int n = grid_.full_size();
        const Eigen::MatrixXd ER = E_ * Eigen::MatrixXd(R_);
        const Eigen::MatrixXd EA = E_ * A_r_;
        A_ = EA * Eigen::MatrixXd(R_) - relaxation_rate_ * (Eigen::MatrixXd::Identity(n, n) - ER);
    }

    void build_functional()
    {
        const auto& g = grid_;
        const auto& k = model_.gains;
        const auto& p = model_.physical;
        ell_ = Eigen::RowVectorXd::Zero(g.full_size());
        for (int j = 0; j <= g.N; ++j)
            ell_(g.z(j)) = mesh_->weight(j);
        for (int kk = 0; kk <= g.Nd; ++kk)
            ell_(g.u(kk)) = k.alpha * k.tau * ((kk == 0 || kk == g.Nd) ? 0.5 * hd_ : hd_);
        ell_(g.y(0)) = k.mu();
        ell_(g.xi()) = p.m;
        ell_(g.eta()) = p.M;
        ell_r_ = ell_ * E_;

        const int n = g.full_size();
        P_ = Eigen::MatrixXd::Identity(n, n);
        for (int j = 0; j <= g.N; ++j)
            P_.row(g.y(j)) -= ell_ / k.mu();
    }

    void build_gram()
    {
        const auto& g = grid_;
        const auto& k = model_.gains;
        const auto& p = model_.physical;
        const int n = g.full_size();
        auto add_pair = [](Eigen::MatrixXd& m, int i, int j, double w, double sign) {
            m(i, i) += w;
            m(j, j) += w;
            m(i, j) += sign * w;
            m(j, i) += sign * w;
        };
        G_ = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j < g.N; ++j) {
            add_pair(G_, g.y(j), g.y(j + 1), abar_(j) / mesh_->cell(j), -1.0);
            add_pair(S, g.y(j), g.y(j + 1), 1.0 / mesh_->cell(j), -1.0);
        }
        for (int j = 0; j <= g.N; ++j) {
            const double w = mesh_->weight(j);
            G_(g.z(j), g.z(j)) += w;
            S(g.z(j), g.z(j)) += w;
            S(g.y(j), g.y(j)) += w;
        }
        for (int kk = 1; kk <= g.Nd; ++kk) {
            add_pair(G_, g.u(kk - 1), g.u(kk), 0.25 * k.K * k.tau * hd_, 1.0);
            add_pair(S, g.u(kk - 1), g.u(kk), 0.25 * hd_, 1.0);
        }
        G_(g.xi(), g.xi()) += p.m;
        G_(g.eta(), g.eta()) += p.M;
        S(g.xi(), g.xi()) += 1.0;
        S(g.eta(), g.eta()) += 1.0;
        add_pair(G_, g.u(0), g.xi(), penalty_, -1.0);
        G_ += model_.weights.varpi * ell_.transpose() * ell_;

        G_r_ = E_.transpose() * G_ * E_;
        S_r_ = E_.transpose() * S * E_;
    }

    void check_assembly()
    {
        const Eigen::RowVectorXd lA = ell_ * A_;
        const Eigen::RowVectorXd scale = ell_.cwiseAbs() * A_.cwiseAbs();
        ell_A_residual_ = lA.cwiseAbs().maxCoeff() / std::max(scale.maxCoeff(), 1e-300);
        if (!(ell_A_residual_ <= 1e-12))
            throw std::runtime_error("assembly check failed: ell * A = " + std::to_string(ell_A_residual_));
    }

    CraneModel model_;
    Grid grid_;
    std::shared_ptr<const CableMesh> mesh_;
    double hd_ = 0.0, w0_ = 0.0, wN_ = 0.0, viscosity_ = 0.0;
    Eigen::VectorXd abar_;
    double platform_mass_ = 0.0, load_mass_ = 0.0, merge_weight_ = 0.0;
    double relaxation_rate_ = 0.0, penalty_ = 0.0;
    SparseMatrix M_r_, K_r_, E_, R_;
    Eigen::MatrixXd A_r_, A_, G_, G_r_, S_r_, P_;
    Eigen::RowVectorXd ell_, ell_r_;
    double ell_A_residual_ = 0.0;
};

inline DiscreteOperator assemble(const CraneModel& model, const Grid& grid, bool strict = true)
{
    return DiscreteOperator(model, grid, strict);
}

inline double inner_product(const CraneState& a, const CraneState& b, const DiscreteOperator& op)
{
    return op.inner_product(a, b);
}

/// Shifts y by a constant so the conserved functional vanishes.
inline CraneState project_to_dot_space(const CraneState& s, const DiscreteOperator& op)
{
    CraneState out = s;
    const double l = conserved_functional(s, op.model());
    out.y.array() -= l / op.model().mu();
    return out;
}

struct NormEquivalence {
    double A1 = 0.0;
    double A2 = 0.0;
    bool on_dot_space = false;
};

/// Extreme generalized eigenvalues of the weighted Gram matrix against the
/// plain H1 x L2 x L2 x R^2 Gram matrix, over compatible states. With varpi = 0
/// the weighted form does not see constants, so the bounds are taken on ker(ell).
inline NormEquivalence norm_equivalence_bounds(const DiscreteOperator& op, bool on_dot_space = false)
{
    const auto& g = op.grid();
    on_dot_space = on_dot_space || op.model().weights.varpi == 0.0;
    Eigen::MatrixXd G = op.reduced_G();
    Eigen::MatrixXd S = op.reduced_standard_gram();
    if (on_dot_space) {
        // basis of ker(ell): drop y_0, which is fixed by the functional
        const int nr = op.reduced_size();
        const auto& l = op.reduced_ell();
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(nr, nr - 1);
        for (int i = 0, c = 0; i < nr; ++i) {
            if (i == g.ry(0))
                continue;
            V(i, c) = 1.0;
            V(g.ry(0), c) = -l(i) / l(g.ry(0));
            ++c;
        }
        G = V.transpose() * G * V;
        S = V.transpose() * S * V;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(G, S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("norm equivalence: generalized eigensolver failed");
    const auto& ev = es.eigenvalues();
    return {std::sqrt(std::max(0.0, ev.minCoeff())), std::sqrt(ev.maxCoeff()), on_dot_space};
}

/// Dense matrix as text: a "# rows cols" header, then one row per line, 17 significant digits.
inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m)
{
    const auto old = os.precision(17);
    os << "# " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j)
                os << ' ';
            os << m(i, j);
        }
        os << '\n';
    }
    os.precision(old);
}

}  // namespace crane

#endif
