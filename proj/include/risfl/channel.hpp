#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "risfl/planner.hpp"
#include "risfl/rng.hpp"

namespace risfl {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;

struct ChannelParams {
    double bandwidth_hz = 3e6;       // B
    double tx_power_dbm = 30.0;      // p
    double noise_power_dbm = -90.0;  // sigma^2; unstated upstream, see scenario files
    double rice_factor = 10.0;       // K
    double los_exponent = 1.5;
    double nlos_exponent = 4.0;
    double ref_loss_db = 30.0;       // reference loss at 1 m

    void validate() const;
};

// Axis-aligned obstruction box.
struct Box {
    Vec3 lo{0, 0, 0};
    Vec3 hi{0, 0, 0};
    bool blocks_segment(const Vec3& a, const Vec3& b) const;
};

struct Geometry {
    std::vector<Vec3> car_positions;
    Vec3 ris_position{0, 0, 0};
    std::vector<Box> obstructions;
    int ris_elements = 16;  // M

    void validate() const;
    bool line_of_sight(const Vec3& a, const Vec3& b) const;
};

// One realization of every channel in the scene: direct car-to-car
// coefficients (reciprocal), car->RIS vectors and RIS->car vectors of
// length M per car.
struct ChannelSet {
    int cars = 0;
    int elements = 0;
    std::vector<Complex> direct;                     // cars x cars, row-major
    std::vector<std::vector<Complex>> car_to_ris;    // [i][k]
    std::vector<std::vector<Complex>> ris_to_car;    // [m][k]

    static ChannelSet zero(int cars, int elements);

    Complex direct_gain(int i, int m) const { return direct[static_cast<std::size_t>(i) * cars + m]; }
    void set_direct(int i, int m, Complex h);

    std::string to_csv() const;
    static ChannelSet from_csv(std::istream& in);
    static ChannelSet from_csv(const std::string& text);
};

// M unit-modulus reflection coefficients (the diagonal of the phase-shift
// matrix).
struct PhaseShiftVector {
    std::vector<Complex> coefficients;

    static PhaseShiftVector identity(int elements);
    static PhaseShiftVector from_phases(const std::vector<double>& radians);

    int size() const { return static_cast<int>(coefficients.size()); }
    // Largest | |c| - 1 | over the coefficients.
    double max_modulus_error() const;
    void validate() const;  // unit modulus within 1e-9
};

// (re, im) pair scaled to unit modulus; the degenerate zero pair maps to 1+0j.
Complex project_unit(Complex raw);

// Path-loss + fading channel draw. Deterministic per seed. Rician with the
// configured K factor on unobstructed links, Rayleigh on obstructed ones;
// obstructed direct links additionally switch to the NLoS exponent (the RIS
// is assumed mounted high, so car-RIS links keep the LoS exponent either
// way).
ChannelSet sample_channels(const Geometry& geom, const ChannelParams& params, std::uint64_t seed);

// h_{i,m} + h_{RIS,m}^H diag(phi) h_{i,RIS}
Complex effective_gain(const ChannelSet& ch, const PhaseShiftVector& phi, int i, int m);

double dbm_to_watts(double dbm);

double rate_from_gain(Complex gain, const ChannelParams& params);

// B log2(1 + p |g|^2 / sigma^2), dBm converted to linear watts.
double link_rate(const ChannelSet& ch, const PhaseShiftVector& phi, int i, int m,
                 const ChannelParams& params);

struct DeconstructionResult {
    PhaseShiftVector phi;
    Complex unconstrained;  // the exact solution before unit-modulus projection
    double residual = 0.0;  // |h_direct + cascade| after projection
};

// Closed-form single-element nulling phase (the matrix-inverse expression is
// only literal for M = 1). Projected to unit modulus when the exact solution
// is not; the leftover |h + cascade| is reported.
DeconstructionResult deconstructive_phase(const ChannelSet& ch, int i, int m);

struct DirectControlResult {
    PhaseShiftVector phi;
    std::map<Edge, double> residuals;  // per deconstructive link
};

// Baseline direct RIS control: element-wise equal-contribution solve of
// sum_k J_k X_kk B_k = -h for the first deconstructive link, every X_kk then
// scaled to modulus 1. The projection error is the point of the baseline.
// Elements with a zero cascade are skipped and the target redistributed.
DirectControlResult direct_control(const ChannelSet& ch, const LinkPlan& plan);

}  // namespace risfl
