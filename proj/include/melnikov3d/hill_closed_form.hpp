#pragma once

#include <vector>

namespace melnikov3d {

/// ∫₀^∞ sech³(3τ/2) cos 4τ dτ = (73π/54) sech(4π/3).
double hill_base_integral();

/// Amplitude (73π²/9) sech(4π/3) of the classical Melnikov function.
double hill_classical_amplitude();

/// M(p, α, t) = (73π²/9) sech(4π/3) sin(6πα) cos 4(p − t) for the classical
/// vortex under g = r² sinθ sin3φ cos4t r̂.
double hill_classical_melnikov(double p, double alpha, double t);

/// Swirl coefficients
///   A = ∫₀^∞ sech³(3τ/2) cos(3τ/(2R0)) cos 4τ dτ,
///   B = ∫₀^∞ sech³(3τ/2) sin(3τ/(2R0)) sin 4τ dτ,
/// by composite Gauss–Legendre on [0, 40].
struct SwirlCoefficients {
  double A = 0.0;
  double B = 0.0;
};
SwirlCoefficients hill_swirl_coefficients(double R0);

/// 6π[A sin6πα cos4(p−t) − B cos6πα sin4(p−t)].
double hill_swirl_melnikov(const SwirlCoefficients& c, double p, double alpha, double t);

/// [A sin6πα cos4(p−t) − B cos6πα sin4(p−t)] / √(A² + B²) at the sphere
/// point (θ, φ), with p = −(2/3) atanh cosθ and 2πα = φ + p/(2R0). Zero on
/// the swirl zero curve.
double hill_swirl_zero_residual(const SwirlCoefficients& c, double R0, double theta, double phi, double t);

/// Zero longitudes α = k/6 and latitudes p_k = t + (2k+1)π/8 inside [p_min, p_max].
std::vector<double> hill_zero_longitudes();
std::vector<double> hill_zero_latitudes(double t, double p_min, double p_max);

/// ∬|M| over α ∈ (0, 1/6), p ∈ (t + 3π/8, t + 5π/8); equals hill_base_integral().
double hill_lobe_integral();

}  // namespace melnikov3d
