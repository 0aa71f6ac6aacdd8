#pragma once

// Deterministic path-space transforms.

#include <cstddef>
#include <vector>

#include "idt/processes.hpp"

namespace idt {

/// Y_j = e^{-alpha y_j / 2} X_{e^{y_j}}; the ensemble grid must equal
/// {e^y} (relative tolerance 1e-12). The result lives on `y_grid`.
PathEnsemble lamperti_apply(const PathEnsemble& e, double alpha,
                            const std::vector<double>& y_grid);

/// Inverse relabeling onto grid e^y. Divides by the same factor e^{-alpha y/2}
/// that lamperti_apply multiplied with, so a round trip is within one ulp.
PathEnsemble lamperti_invert(const PathEnsemble& e, double alpha);

PathEnsemble scale_paths(const PathEnsemble& e, double c);

/// Column j of the result is read as time grid[j] / a: the same values now
/// describe t -> X_{a t}.
PathEnsemble dilate_grid(const PathEnsemble& e, double a);

/// Pointwise sum of n independent ensembles. Copy 0 uses `rng` itself, copy
/// j >= 1 uses rng.split(j), so n = 1 is exactly generate().
PathEnsemble sum_independent(const ProcessSpec& spec, std::size_t n,
                             const TimeGrid& grid, std::size_t n_paths,
                             const RngState& rng);

}  // namespace idt
