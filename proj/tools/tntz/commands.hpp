#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tnt/tnt.hpp"

namespace tntz {

/// Bad flag combination; exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Batch and loop results disagreed; exit code 4.
class GateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DecomposeArgs {
    std::string input;
    std::vector<tnt::Index> shape;
    std::string format = "tt";
    double eps = 0.0;
    tnt::Index rank = 0;
    std::string output;
    tnt::Index batch = 0;
    std::uint64_t seed = 0;
};

struct RoundArgs {
    std::string input;
    double eps = 0.0;
    tnt::Index rank = 0;
    std::string output;
};

struct CrossArgs {
    std::string function;
    std::vector<tnt::Index> shape;
    double eps = 1e-10;
    std::uint64_t seed = 0;
    tnt::Index max_iters = 10;
    tnt::Index validation_size = 100;
    std::string output;
};

struct BenchmarkArgs {
    std::string op = "all";
    std::vector<tnt::Index> sizes{15, 25, 35, 45};
    tnt::Index rank = 20;
    tnt::Index dims = 8;
    tnt::Index ttsvd_dims = 4;
    tnt::Index batch = 32;
    std::string mode = "both";
    tnt::Index repeats = 10;
    tnt::Index warmup = 2;
    double memory_limit_gb = 2.0;
    std::uint64_t seed = 0;
    std::string output;
};

int run_decompose(const DecomposeArgs& args);
int run_info(const std::string& input);
int run_reconstruct(const std::string& input, const std::string& output);
int run_round(const RoundArgs& args);
int run_cross(const CrossArgs& args);
int run_benchmark(const BenchmarkArgs& args);

/// Builtin black-box functions exposed by `tntz cross`.
const std::vector<std::string>& function_names();
tnt::BlackBox make_function(const std::string& name, const tnt::Shape& shape);

std::string format_list(const std::vector<tnt::Index>& v);

}  // namespace tntz
