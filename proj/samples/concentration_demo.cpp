// Relative contrast of pairwise l_p distances on a uniform cube, and a
// leave-one-out kNN run on a small two-blob dataset.

#include <cstdio>
#include <random>

#include "lpconc/lpconc.hpp"

int main() {
    using namespace lpconc;

    const std::vector<std::size_t> dims{2, 10, 50};
    const auto records = concentration_sweep(500, dims, canonical_exponents(), 2024);
    std::printf("%6s %6s %12s %12s\n", "dim", "p", "RC", "CV");
    for (const auto& r : records) {
        std::printf("%6zu %6s %12.5f %12.5f\n", r.dimension, r.p.to_string().c_str(), r.rc, r.cv);
    }

    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = 200;
    const std::size_t d = 5;
    std::vector<double> values;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const bool positive = i % 2 == 0;
        for (std::size_t j = 0; j < d; ++j) {
            values.push_back(noise(rng) + (positive ? 1.0 : 0.0));
        }
        labels.push_back(positive ? Label::positive : Label::negative);
    }
    const LabeledDataset ds{DataMatrix(n, d, std::move(values)), std::move(labels), "blobs"};
    std::printf("\n%6s %8s %9s %9s %9s\n", "p", "TNNSC", "accuracy", "Se", "Sp");
    for (auto p : {LpExponent(0.5), LpExponent(1.0), LpExponent(2.0), LpExponent::infinity()}) {
        const auto q = loo_evaluate(ds, {11, p});
        std::printf("%6s %8zu %9.4f %9.4f %9.4f\n", p.to_string().c_str(), q.tnnsc, q.accuracy, q.sensitivity,
                    q.specificity);
    }
    return 0;
}
