#include <cmath>

#include "commands.hpp"

namespace tntz {

const std::vector<std::string>& function_names() {
    static const std::vector<std::string> names{"const1", "index_sum", "gaussian_bump", "reciprocal_shifted"};
    return names;
}

tnt::BlackBox make_function(const std::string& name, const tnt::Shape& shape) {
    if (name == "const1") return [](std::span<const tnt::Index>) { return 1.0; };
    if (name == "index_sum")
        return [](std::span<const tnt::Index> idx) {
            double s = 0.0;
            for (tnt::Index i : idx) s += static_cast<double>(i);
            return s;
        };
    if (name == "gaussian_bump")
        // centred at n/2 on every mode, width n/4
        return [shape](std::span<const tnt::Index> idx) {
            double e = 0.0;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                const double c = static_cast<double>(shape[k] / 2);
                const double w = std::max(1.0, static_cast<double>(shape[k]) / 4.0);
                const double d = (static_cast<double>(idx[k]) - c) / w;
                e += d * d;
            }
            return std::exp(-e);
        };
    if (name == "reciprocal_shifted")
        return [](std::span<const tnt::Index> idx) {
            double s = 1.0;
            for (tnt::Index i : idx) s += static_cast<double>(i);
            return 1.0 / s;
        };
    throw UsageError("unknown function '" + name + "'");
}

}  // namespace tntz
