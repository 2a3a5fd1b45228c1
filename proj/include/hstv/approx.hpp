#pragma once

#include <hstv/field.hpp>
#include <hstv/mesh.hpp>
#include <hstv/rational.hpp>
#include <hstv/schatten.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hstv {

/// Rotation angle theta = atan(q/p) with gcd(p, q) = 1 and (p, q) != (1, 1).
struct RationalAngle {
    std::int64_t p = 2;
    std::int64_t q = 1;

    double theta() const;
    std::int64_t r2() const { return p * p + q * q; }
    /// theta < pi/4: the square is built for the mirrored angle and reflected.
    bool reflected() const { return q < p; }
    std::int64_t q_hat() const { return q < p ? p : q; }
    std::int64_t p_hat() const { return q < p ? q : p; }

    friend bool operator==(const RationalAngle&, const RationalAngle&) = default;
};

/// |R(a) - R(b)|_1 = 4 |sin((a - b)/2)|.
double rotation_distance(double a, double b);

/// First node q/p on the Stern-Brocot path towards tan(theta_hat), skipping
/// 1/1, whose rotation lies within eps of R(theta_hat) in the nuclear norm.
/// theta_hat in [0, pi/2), eps > 0.
RationalAngle rational_angle_approx(double theta_hat, double eps);

struct SquareFrame {
    std::size_t k = 0; ///< iy * 2^N + ix
    int ix = 0, iy = 0;
    Rational x0, y0, side; ///< Q_k = [x0, x0 + side] x [y0, y0 + side]
    Vec2 centre;
    Mat2 d;                ///< eigenvalues of the Hessian at the centre
    double theta_hat = 0;  ///< eigenframe angle in [0, pi/2)
    bool isotropic = false;
    RationalAngle angle;
    double deviation = 0;  ///< max over the sample lattice of |U^T H U - D|_1
};

/// One frame per dyadic square of side 2^-N. Angles use eps (default
/// 1/max(N, 1)); isotropic centres get (2, 1). The deviation is sampled on an
/// s x s lattice (corners included) with s = samples_per_square.
std::vector<SquareFrame> build_frames(const SmoothField& f, int n, int samples_per_square = 9,
                                      std::optional<double> eps = std::nullopt);

/// Smallest N with 2^-N <= eps.
int levels_for_eps(double eps);

enum class PlanMode { lcm, paper };

PlanMode parse_plan_mode(const std::string& text);
std::string to_string(PlanMode mode);

/// Grid pitches for every square. With q^_k = max(p_k, q_k) (the angle after
/// reflection into (pi/4, pi/2)) the boundary spacing is
/// s = 2^-(N+K) / prod_h q^_h (paper) or 2^-(N+K) / lcm_h q^_h (lcm), and the
/// pitch of square k satisfies h_k sqrt(p_k^2 + q_k^2) = s q^_k.
struct MeshPlan {
    int n = 0;
    int k = 0;
    PlanMode mode = PlanMode::lcm;
    std::vector<SquareFrame> frames;
    Rational s;                        ///< common boundary spacing
    std::int64_t period = 1;           ///< prod or lcm of q^_k
    std::vector<Rational> scaled_pitch; ///< h_k * sqrt(p_k^2 + q_k^2), rational
    double estimated_triangles = 0;

    double pitch(std::size_t k) const;
};

struct PlanLimits {
    double max_triangles = 4e6;
};

/// Throws PlanError when s < 2^-40 or the mesh would exceed the limits.
MeshPlan plan_mesh(std::vector<SquareFrame> frames, int n, int k, PlanMode mode = PlanMode::lcm,
                   const PlanLimits& limits = {});

struct SquareMesh {
    Triangulation mesh;
    /// 0 for inner-grid triangles, 1..4 for the top, right, bottom and left
    /// transition bands (before any reflection).
    std::vector<std::uint8_t> band;
    std::size_t square = 0;
};

/// Triangulation of Q_k: four self-similar transition bands along the sides and
/// a grid of squares aligned with the rational eigenframe inside.
SquareMesh triangulate_square(const MeshPlan& plan, std::size_t k);

/// Joins all squares of the plan into one mesh of [0,1]^2 and validates
/// conformity exactly. Squares are built in parallel.
Triangulation assemble_global(const MeshPlan& plan);

CpwlFunction interpolate(const SmoothField& f, std::shared_ptr<const Triangulation> mesh);

/// max |f - g| over a barycentric lattice of the given order on every triangle.
double sup_error(const SmoothField& f, const CpwlFunction& g, int order = 4);
/// max |f - g| over the nodes of an n x n grid on [0,1]^2 (point location).
double sup_error_probe(const SmoothField& f, const CpwlFunction& g, int n = 512);

struct ConvergenceRow {
    int k = 0;
    std::size_t vertices = 0;
    std::size_t triangles = 0;
    double min_angle = 0;
    double sup_error = 0;
    double htv_cpwl = 0;
    double htv_reference = 0;
};

struct ExperimentOptions {
    PlanMode mode = PlanMode::lcm;
    SchattenP p = SchattenP::one();
    int quadrature_resolution = 512;
    int samples_per_square = 9;
    std::optional<double> eps;
    PlanLimits limits;
    /// Called with every interpolant, for callers that export meshes.
    std::function<void(int k, const CpwlFunction& g)> on_mesh;
};

/// Rows for each K in [k_first, k_last] on a fixed set of frames.
std::vector<ConvergenceRow> convergence_experiment(const SmoothField& f, int n, int k_first, int k_last,
                                                   const ExperimentOptions& options = {});

std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

namespace reference {

double sup_error(const SmoothField& f, const CpwlFunction& g, int order = 4);

} // namespace reference

} // namespace hstv
