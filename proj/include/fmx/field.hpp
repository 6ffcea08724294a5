#pragma once

// Velocity and stress in the Stokes eigenbasis: coefficient norms of the
// H_theta, D_gamma and Delta_theta scales, the stress series, and an explicit
// divergence-free trigonometric basis on the periodic box [0, 2pi)^3.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fmx/error.hpp"
#include "fmx/kernels.hpp"
#include "fmx/modal.hpp"
#include "fmx/params.hpp"

namespace fmx {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>; // row-major, (grad w)_{ij} = d w_i / d x_j

enum class BasisKind { Synthetic, PeriodicBox };

/// One trigonometric mode  w(x) = c p cos(m.x)  or  c p sin(m.x),  p . m = 0.
struct BoxMode {
    std::array<int, 3> m{};
    Vec3 polarization{};
    bool sine = false;
};

struct SpectralBasis {
    BasisKind kind = BasisKind::Synthetic;
    std::vector<double> lambdas;
    // Periodic box only.
    std::vector<BoxMode> modes;
    std::size_t lattice = 0;

    [[nodiscard]] std::size_t size() const noexcept { return lambdas.size(); }

    void validate() const
    {
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            if (!(lambdas[k] > 0.0) || !std::isfinite(lambdas[k]))
                throw ValidationError("SpectralBasis: eigenvalue " + std::to_string(k) + " is not positive");
            if (k > 0 && lambdas[k] < lambdas[k - 1]) throw ValidationError("SpectralBasis: eigenvalues must be nondecreasing");
        }
        if (kind == BasisKind::PeriodicBox && modes.size() != lambdas.size())
            throw ValidationError("SpectralBasis: periodic box needs one mode record per eigenvalue");
    }
};

/// lambda_k = c k^{2/3}, k = 1..K.
inline SpectralBasis synthetic_basis(std::size_t size, double c = 1.0)
{
    if (size == 0) throw DomainError("synthetic_basis: need at least one mode");
    if (!(c > 0.0)) throw ValidationError("synthetic_basis: scale c must be positive");
    SpectralBasis b;
    b.kind = BasisKind::Synthetic;
    b.lambdas.resize(size);
    for (std::size_t k = 0; k < size; ++k) b.lambdas[k] = c * std::pow(static_cast<double>(k + 1), 2.0 / 3.0);
    return b;
}

namespace detail {

inline Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Vec3 normalized(Vec3 v)
{
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

inline double box_volume() { return 8.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi; }

} // namespace detail

/// Divergence-free trigonometric eigenmodes of the Stokes operator on the
/// periodic box: wavevectors 0 < |m|^2 <= K^2 in a half-space, two
/// polarizations, cosine and sine parity, sorted by lambda = |m|^2. The
/// sample lattice has 2K + 2 points per axis, which makes the discrete inner
/// products of any two modes exact.
inline SpectralBasis build_periodic_basis(int max_wavevector, std::size_t max_modes = 0)
{
    if (max_wavevector < 1) throw DomainError("build_periodic_basis: max_wavevector must be >= 1");
    const int K = max_wavevector;
    std::vector<std::tuple<int, std::array<int, 3>>> vecs;
    for (int i = -K; i <= K; ++i)
        for (int j = -K; j <= K; ++j)
            for (int l = -K; l <= K; ++l) {
                const std::array<int, 3> m{i, j, l};
                const int n2 = i * i + j * j + l * l;
                if (n2 == 0 || n2 > K * K) continue;
                // Half-space: first nonzero component positive.
                const int lead = i != 0 ? i : (j != 0 ? j : l);
                if (lead < 0) continue;
                vecs.emplace_back(n2, m);
            }
    std::sort(vecs.begin(), vecs.end());

    SpectralBasis b;
    b.kind = BasisKind::PeriodicBox;
    b.lattice = static_cast<std::size_t>(2 * K + 2);
    for (const auto& [n2, m] : vecs) {
        const Vec3 mv{static_cast<double>(m[0]), static_cast<double>(m[1]), static_cast<double>(m[2])};
        const Vec3 axis = (m[0] == 0 && m[1] == 0) ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
        const Vec3 p1 = detail::normalized(detail::cross(mv, axis));
        const Vec3 p2 = detail::normalized(detail::cross(mv, p1));
        for (bool sine : {false, true})
            for (const Vec3& p : {p1, p2}) {
                b.modes.push_back(BoxMode{m, p, sine});
                b.lambdas.push_back(static_cast<double>(n2));
            }
    }
    if (max_modes > 0 && max_modes < b.size()) {
        b.modes.resize(max_modes);
        b.lambdas.resize(max_modes);
    }
    return b;
}

/// Sampled fields on the box lattice; values are stored point-major.
struct LatticeVectorField {
    std::size_t n = 0;
    std::vector<Vec3> values;
};

struct LatticeTensorField {
    std::size_t n = 0;
    std::vector<Mat3> values;

    [[nodiscard]] LatticeTensorField transposed() const
    {
        LatticeTensorField t{n, values};
        for (Mat3& a : t.values) {
            std::swap(a[1], a[3]);
            std::swap(a[2], a[6]);
            std::swap(a[5], a[7]);
        }
        return t;
    }

    LatticeTensorField& axpy(double s, const LatticeTensorField& x)
    {
        if (values.empty()) {
            n = x.n;
            values.assign(x.values.size(), Mat3{});
        }
        for (std::size_t i = 0; i < values.size(); ++i)
            for (std::size_t c = 0; c < 9; ++c) values[i][c] += s * x.values[i][c];
        return *this;
    }
};

namespace detail {

inline void require_box(const SpectralBasis& b, std::size_t k)
{
    if (b.kind != BasisKind::PeriodicBox) throw DomainError("lattice sampling needs a periodic-box basis");
    if (k >= b.size()) throw DomainError("mode index out of range");
}

template <class F>
void for_lattice(std::size_t n, F&& f)
{
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l, ++idx) f(idx, Vec3{h * i, h * j, h * l});
}

} // namespace detail

/// L2-normalized mode w_k on the lattice.
inline LatticeVectorField sample_mode(const SpectralBasis& b, std::size_t k)
{
    detail::require_box(b, k);
    const BoxMode& md = b.modes[k];
    const double c = std::sqrt(2.0 / detail::box_volume());
    LatticeVectorField f{b.lattice, std::vector<Vec3>(b.lattice * b.lattice * b.lattice)};
    detail::for_lattice(b.lattice, [&](std::size_t idx, const Vec3& x) {
        const double ph = md.m[0] * x[0] + md.m[1] * x[1] + md.m[2] * x[2];
        const double v = c * (md.sine ? std::sin(ph) : std::cos(ph));
        f.values[idx] = {v * md.polarization[0], v * md.polarization[1], v * md.polarization[2]};
    });
    return f;
}

/// grad w_k on the lattice.
inline LatticeTensorField sample_mode_gradient(const SpectralBasis& b, std::size_t k)
{
    detail::require_box(b, k);
    const BoxMode& md = b.modes[k];
    const double c = std::sqrt(2.0 / detail::box_volume());
    LatticeTensorField f{b.lattice, std::vector<Mat3>(b.lattice * b.lattice * b.lattice)};
    detail::for_lattice(b.lattice, [&](std::size_t idx, const Vec3& x) {
        const double ph = md.m[0] * x[0] + md.m[1] * x[1] + md.m[2] * x[2];
        const double d = c * (md.sine ? std::cos(ph) : -std::sin(ph));
        Mat3& g = f.values[idx];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) g[3 * i + j] = d * md.polarization[i] * md.m[j];
    });
    return f;
}

/// eps_k = grad w_k / sqrt(lambda_k) on the lattice.
inline LatticeTensorField sample_epsilon(const SpectralBasis& b, std::size_t k)
{
    LatticeTensorField g = sample_mode_gradient(b, k);
    const double s = 1.0 / std::sqrt(b.lambdas[k]);
    for (Mat3& a : g.values)
        for (double& v : a) v *= s;
    return g;
}

/// Lattice quadrature of int u . v over the box.
inline double lattice_inner(const LatticeVectorField& u, const LatticeVectorField& v)
{
    if (u.n != v.n || u.values.size() != v.values.size()) throw DomainError("lattice_inner: lattice mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        s += u.values[i][0] * v.values[i][0] + u.values[i][1] * v.values[i][1] + u.values[i][2] * v.values[i][2];
    return s * detail::box_volume() / static_cast<double>(u.values.size());
}

/// Lattice quadrature of int f : g over the box.
inline double lattice_inner(const LatticeTensorField& f, const LatticeTensorField& g)
{
    if (f.n != g.n || f.values.size() != g.values.size()) throw DomainError("lattice_inner: lattice mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        for (std::size_t c = 0; c < 9; ++c) s += f.values[i][c] * g.values[i][c];
    return s * detail::box_volume() / static_cast<double>(f.values.size());
}

/// max over the lattice of |div w_k| = |trace grad w_k|.
inline double lattice_divergence(const SpectralBasis& b, std::size_t k)
{
    const LatticeTensorField g = sample_mode_gradient(b, k);
    double worst = 0.0;
    for (const Mat3& a : g.values) worst = std::max(worst, std::abs(a[0] + a[4] + a[8]));
    return worst;
}

/// S0 = sum a_k eps_k + sum a_t_k eps_k^T + P(S0), with only |P(S0)| kept.
struct StressDecomposition {
    std::vector<double> a;
    std::vector<double> a_t;
    double remainder = 0.0;
};

/// Coefficients of a lattice tensor field along eps_k and eps_k^T and the
/// norm of the part orthogonal to both families.
inline StressDecomposition decompose_stress(const SpectralBasis& b, const LatticeTensorField& S)
{
    StressDecomposition d;
    d.a.resize(b.size());
    d.a_t.resize(b.size());
    double captured = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        const LatticeTensorField e = sample_epsilon(b, k);
        d.a[k] = lattice_inner(S, e);
        d.a_t[k] = lattice_inner(S, e.transposed());
        captured += d.a[k] * d.a[k] + d.a_t[k] * d.a_t[k];
    }
    d.remainder = std::sqrt(std::max(0.0, lattice_inner(S, S) - captured));
    return d;
}

/// Lattice coefficients <u | w_k>.
inline std::vector<double> project_velocity(const SpectralBasis& b, const LatticeVectorField& u)
{
    std::vector<double> c(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) c[k] = lattice_inner(u, sample_mode(b, k));
    return c;
}

/// ModalProblem with alpha_k^0 = <u0|w_k> and b_k = sqrt(lambda_k) <S0|eps_k>.
inline ModalProblem project_initial_data(const KernelParams& p, const std::vector<double>& lambdas,
                                         const std::vector<double>& u0_coeffs, const StressDecomposition& S0)
{
    if (u0_coeffs.size() != lambdas.size() || S0.a.size() != lambdas.size() || S0.a_t.size() != lambdas.size())
        throw DomainError("project_initial_data: coefficient lists must match the basis size");
    std::vector<double> b(lambdas.size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = std::sqrt(lambdas[k]) * S0.a[k];
    return ModalProblem(p, lambdas, u0_coeffs, std::move(b));
}

struct VelocityField {
    std::vector<double> lambdas;
    std::vector<double> coeffs;
    double t = 0.0;
};

/// Stress coordinates along eps_k, along eps_k^T, and the orthogonal remainder norm.
struct StressCoordinates {
    std::vector<double> lambdas;
    std::vector<double> along;
    std::vector<double> along_t;
    double remainder = 0.0;
};

/// S(t) = sum c_k sqrt(lambda_k)(eps_k + eps_k^T) + W0(t) S0 with c_k = (rho * alpha_k)(t).
struct StressField {
    std::vector<double> lambdas;
    std::vector<double> sym_coeffs;
    double w0 = 1.0;
    StressDecomposition s0;
    double t = 0.0;

    [[nodiscard]] StressCoordinates coordinates() const
    {
        StressCoordinates c{lambdas, std::vector<double>(lambdas.size()), std::vector<double>(lambdas.size()),
                            w0 * s0.remainder};
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            const double sym = std::sqrt(lambdas[k]) * sym_coeffs[k];
            c.along[k] = sym + w0 * s0.a[k];
            c.along_t[k] = sym + w0 * s0.a_t[k];
        }
        return c;
    }
};

inline StressCoordinates coordinates_of(const std::vector<double>& lambdas, const StressDecomposition& S0)
{
    return StressCoordinates{lambdas, S0.a, S0.a_t, S0.remainder};
}

/// Coordinate difference; the remainders are both multiples of P(S0) and subtract as scalars.
inline StressCoordinates operator-(const StressCoordinates& x, const StressCoordinates& y)
{
    if (x.along.size() != y.along.size()) throw DomainError("stress coordinates of different lengths");
    StressCoordinates d = x;
    for (std::size_t k = 0; k < d.along.size(); ++k) {
        d.along[k] -= y.along[k];
        d.along_t[k] -= y.along_t[k];
    }
    d.remainder = std::abs(x.remainder - y.remainder);
    return d;
}

inline VelocityField operator-(const VelocityField& x, const VelocityField& y)
{
    if (x.coeffs.size() != y.coeffs.size()) throw DomainError("velocity fields of different lengths");
    VelocityField d = x;
    for (std::size_t k = 0; k < d.coeffs.size(); ++k) d.coeffs[k] -= y.coeffs[k];
    return d;
}

namespace detail {

inline void require_trajectories(const ModalProblem& problem, std::span<const ModalTrajectory> traj)
{
    if (traj.size() != problem.size()) throw DomainError("need one trajectory per mode");
    for (std::size_t k = 0; k < traj.size(); ++k)
        if (traj[k].k != k) throw DomainError("trajectories must be ordered by mode index");
}

} // namespace detail

inline VelocityField assemble_velocity(const ModalProblem& problem, std::span<const ModalTrajectory> traj, double t)
{
    detail::require_trajectories(problem, traj);
    VelocityField u{problem.lambdas, std::vector<double>(problem.size()), t};
    for (std::size_t k = 0; k < problem.size(); ++k) u.coeffs[k] = traj[k].alpha_at(t);
    return u;
}

inline StressField assemble_stress(const ModalProblem& problem, std::span<const ModalTrajectory> traj, double t,
                                   const StressDecomposition& S0, const QuadratureSpec& q = {})
{
    detail::require_trajectories(problem, traj);
    if (S0.a.size() != problem.size() || S0.a_t.size() != problem.size())
        throw DomainError("assemble_stress: stress decomposition does not match the problem size");
    StressField S{problem.lambdas, std::vector<double>(problem.size()), eval_W0(t, problem.params, q), S0, t};
    for (std::size_t k = 0; k < problem.size(); ++k) S.sym_coeffs[k] = t == 0.0 ? 0.0 : traj[k].rho_conv_at(t);
    return S;
}

/// ||u||_{H_theta}^2 = sum lambda_k^theta |alpha_k|^2.
inline double norm_H(const VelocityField& u, double theta)
{
    double s = 0.0;
    for (std::size_t k = 0; k < u.coeffs.size(); ++k) s += std::pow(u.lambdas[k], theta) * u.coeffs[k] * u.coeffs[k];
    return std::sqrt(s);
}

/// ||S||_{D_gamma}^2 = sum lambda^gamma |<S|eps_k>|^2 + ||Pi(S)||^2, where Pi(S)
/// collects the eps_k^T coordinates and the remainder.
inline double norm_D(const StressCoordinates& c, double gamma)
{
    double s = c.remainder * c.remainder;
    for (std::size_t k = 0; k < c.along.size(); ++k)
        s += std::pow(c.lambdas[k], gamma) * c.along[k] * c.along[k] + c.along_t[k] * c.along_t[k];
    return std::sqrt(s);
}

/// ||S||_{Delta_theta}^2 = sum lambda^theta (|<S|eps_k>|^2 + |<S|eps_k^T>|^2) + ||P(S)||^2.
/// Negative theta uses the same coefficient formula.
inline double norm_Delta(const StressCoordinates& c, double theta)
{
    double s = c.remainder * c.remainder;
    for (std::size_t k = 0; k < c.along.size(); ++k)
        s += std::pow(c.lambdas[k], theta) * (c.along[k] * c.along[k] + c.along_t[k] * c.along_t[k]);
    return std::sqrt(s);
}

inline double norm_D(const StressField& S, double gamma) { return norm_D(S.coordinates(), gamma); }
inline double norm_Delta(const StressField& S, double theta) { return norm_Delta(S.coordinates(), theta); }

/// D_theta inner product of two lattice tensor fields, with Pi taken relative
/// to the span of the basis' eps_k.
inline double lattice_D_inner(const SpectralBasis& b, const LatticeTensorField& f, const LatticeTensorField& g,
                              double theta)
{
    double s = lattice_inner(f, g);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const LatticeTensorField e = sample_epsilon(b, k);
        const double cf = lattice_inner(f, e);
        const double cg = lattice_inner(g, e);
        s += (std::pow(b.lambdas[k], theta) - 1.0) * cf * cg;
    }
    return s;
}

} // namespace fmx
