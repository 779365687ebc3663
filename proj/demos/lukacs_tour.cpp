// Walk through the main objects: NC(4) and its Kreweras complements, free
// Poisson cumulants of X and X^{-1}, a vanishing mixed cumulant of
// (X^{-1}Y, X+Y), and the free gamma pair for which the analogue fails.

#include "freecum/freecum.hpp"

#include <iostream>

using namespace freecum;

int main()
{
    std::cout << "NC(4), " << catalan(4).get_str() << " partitions, with Kreweras complements:\n";
    for (const auto& p : enumerate_nc(4))
        std::cout << "  " << to_string(p) << "  ->  " << to_string(kreweras(p)) << "\n";

    FreePoissonParams params(2, 1);
    std::cout << "\nfree Poisson(2, 1):\n";
    for (int k = 1; k <= 5; ++k)
        std::cout << "  R_" << k << "(X) = " << to_string(fp_cumulant(k, params))
                  << "   R_" << k << "(X^{-1}) = " << to_string(inv_fp_cumulant(k, params)) << "\n";

    FreeModel model = lukacs_model(2, 1, 1);
    Engine engine(model);
    auto slots = lukacs_slots(engine.model(), "UVUV");
    std::cout << "\n" << pattern_query("UVUV") << " = " << to_string(engine.expr_mixed_cumulant(slots)) << "\n";

    auto gamma = gamma_counterexample(2);
    std::cout << "\n" << to_table(gamma);
    return gamma.pass() ? 0 : 1;
}
