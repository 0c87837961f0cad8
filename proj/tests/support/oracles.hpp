#pragma once

#include "forgemask/losses/losses.hpp"

#include <cstdint>
#include <vector>

// Straightforward re-implementations used as test oracles. They share no code
// with the library and favour directness over speed or numerical care.
namespace forgemask::testkit {

/// Exhaustive Otsu over every interior bin edge of a [-1, 1] histogram with
/// exact rational arithmetic; bin centres are the class values. NaN when no
/// edge separates two non-empty classes.
double otsu_oracle(const std::vector<double>& scores, int bins);

/// Contrastive objective evaluated with plain exp/log, no log-sum-exp.
double contrastive_reference(const losses::VectorSet& forged, const losses::VectorSet& real, double tau);

double dice_reference(const std::vector<double>& p, const std::vector<std::uint8_t>& m);

double focal_reference(const std::vector<double>& p, const std::vector<std::uint8_t>& m, double gamma,
                       double alpha);

}  // namespace forgemask::testkit
