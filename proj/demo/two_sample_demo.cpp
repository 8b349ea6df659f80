// Draws two Erdos-Renyi samples and compares them with the W statistic.
#include <iostream>

#include "graphdist/graphdist.hpp"

int main() {
    using namespace graphdist;

    const std::size_t v = 8;
    Engine rng_a = stream_engine(2024, 0);
    Engine rng_b = stream_engine(2024, 1);
    const auto a = sample_er(v, 0.5, 40, rng_a);
    const auto b = sample_er(v, 0.65, 40, rng_b);

    const auto w = w_two_sample(a, b);
    std::cout << "W = " << w.value << " (exact " << w.exact->numerator << '/' << w.exact->denominator << ")\n";

    PermutationOptions opts;
    opts.permutations = 1000;
    opts.seed = 7;
    const auto result = two_sample_permutation_test(a, b, opts);
    std::cout << "permutation p-value = " << *result.p_value << (result.reject ? " (reject)" : " (keep)") << '\n';

    const auto [g_star, g_star_star] = argmax_graphs(a, mean_graph(b));
    std::cout << "maximizer g* has " << edge_count(g_star) << " edges, g** has " << edge_count(g_star_star) << '\n';
}
