#pragma once

// Oracle outputs frozen from the dense projected-gradient solver in
// oracles.hpp (Frank-Wolfe gap below 1e-14 at every entry). The unit tests
// recompute them and fail if the oracle drifts.

namespace frozen {

/// f* for instances::gap_instance(i), i = 0..9.
inline constexpr double kGapInstanceOptimum[10] = {
    0.051750242625907536, 2.0665439842763689e-30, 0.41859617643410557, 2.9444707406010574e-31,
    0.18990111227229062,  0.17576597958960655,    0.065397620786047272, 3.8609906339466692e-31,
    0.37203010532641484,  8.9397154120148331e-31,
};

/// Leading singular values of the optimum of instances::rank2_instance;
/// the third is zero to machine precision.
inline constexpr double kRank2Singular[2] = {12.307806962806488, 7.539352034602369};

/// f at that optimum.
inline constexpr double kRank2Optimum = 0.058870548895981596;

}  // namespace frozen
