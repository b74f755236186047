#pragma once

// Small random models and batches for gradient and descent checks.

#include <cstdint>
#include <string>
#include <vector>

#include "kgprompt/objectives.hpp"

namespace problems {

struct Problem {
    kgprompt::Model model;
    std::vector<kgprompt::EncodedSample> batch;
};

// Width m, J patches, K classes; filters and biases are perturbed away from
// their identity/zero start so every path carries gradient.
Problem random_problem(std::uint64_t seed, std::size_t m, std::size_t patches, std::size_t classes,
                       std::size_t batch_size);

struct GradCheck {
    double worst = 0.0;  // relative error
    std::string worst_tensor;
    std::size_t checked = 0;
};

// Central differences on every parameter with the irrelevant-patch sets
// frozen at their current values.
GradCheck check_gradients(Problem p, double tau, double lambda, double step);

}  // namespace problems
