#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

enum ExitCode { ok = 0, usage = 2, data = 3, numeric = 4 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tntz: compressed tensor networks (TT, CP, Tucker)"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    try {
        seed = tnt::default_seed();
    } catch (const tnt::ContractViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }

    tntz::DecomposeArgs dec;
    dec.seed = seed;
    auto* decompose = app.add_subcommand("decompose", "Decompose a dense file into a container");
    decompose->add_option("--input", dec.input, "Dense file of little-endian doubles")->required();
    decompose->add_option("--shape", dec.shape, "Mode sizes, e.g. 15,15,15,15")->delimiter(',')->required();
    decompose->add_option("--format", dec.format, "tt, cp or tucker")->check(CLI::IsMember({"tt", "cp", "tucker"}));
    auto* dec_eps = decompose->add_option("--eps", dec.eps, "Relative error target")->check(CLI::NonNegativeNumber);
    decompose->add_option("--rank", dec.rank, "Rank cap (CP rank for cp)")->check(CLI::PositiveNumber)->excludes(dec_eps);
    decompose->add_option("--output", dec.output, "Container path")->required();
    decompose->add_option("--batch", dec.batch, "Size of a leading batch mode in the input")->check(CLI::PositiveNumber);
    decompose->add_option("--seed", dec.seed, "Seed for CP-ALS");

    std::string info_input;
    auto* info = app.add_subcommand("info", "Print container metadata");
    info->add_option("container", info_input)->required();

    std::string rec_input, rec_output;
    auto* reconstruct = app.add_subcommand("reconstruct", "Write the dense contents of a container");
    reconstruct->add_option("container", rec_input)->required();
    reconstruct->add_option("--output", rec_output, "Dense file path")->required();

    tntz::RoundArgs rnd;
    auto* round = app.add_subcommand("round", "Truncate the ranks of a stored tensor");
    round->add_option("container", rnd.input)->required();
    auto* rnd_eps = round->add_option("--eps", rnd.eps, "Relative error bound")->check(CLI::NonNegativeNumber);
    round->add_option("--rank", rnd.rank, "Rank cap")->check(CLI::PositiveNumber)->excludes(rnd_eps);
    round->add_option("--output", rnd.output, "Container path")->required();

    tntz::CrossArgs crs;
    crs.seed = seed;
    auto* cross = app.add_subcommand("cross", "Cross-approximate a builtin function");
    cross->add_option("--function", crs.function, "Builtin function")
        ->check(CLI::IsMember(tntz::function_names()))
        ->required();
    cross->add_option("--shape", crs.shape, "Grid sizes")->delimiter(',')->required();
    cross->add_option("--eps", crs.eps, "Validation error target")->check(CLI::Range(0.0, 1.0));
    cross->add_option("--seed", crs.seed, "Seed for index sets and validation samples");
    cross->add_option("--max-iters", crs.max_iters, "Sweep cap")->check(CLI::PositiveNumber);
    cross->add_option("--validation-size", crs.validation_size, "Validation samples")->check(CLI::PositiveNumber);
    cross->add_option("--output", crs.output, "Container path");

    tntz::BenchmarkArgs bench;
    bench.seed = seed;
    auto* benchmark = app.add_subcommand("benchmark", "Time loop versus batch execution");
    benchmark->add_option("--op", bench.op, "sum, product, ttsvd, cross or all")
        ->check(CLI::IsMember({"sum", "product", "ttsvd", "cross", "all"}));
    benchmark->add_option("--sizes", bench.sizes, "Mode sizes I")->delimiter(',');
    benchmark->add_option("--rank", bench.rank, "TT rank R");
    benchmark->add_option("--dims", bench.dims, "Number of modes N");
    benchmark->add_option("--ttsvd-dims", bench.ttsvd_dims, "Number of modes N for ttsvd");
    benchmark->add_option("--batch", bench.batch, "Batch size B");
    benchmark->add_option("--mode", bench.mode, "loop, batch or both")->check(CLI::IsMember({"loop", "batch", "both"}));
    benchmark->add_option("--repeats", bench.repeats, "Timed repetitions");
    benchmark->add_option("--warmup", bench.warmup, "Untimed repetitions");
    benchmark->add_option("--memory-limit-gb", bench.memory_limit_gb, "Refuse cases estimated above this size");
    benchmark->add_option("--seed", bench.seed, "Fixture seed");
    benchmark->add_option("--output", bench.output, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*decompose) return tntz::run_decompose(dec);
        if (*info) return tntz::run_info(info_input);
        if (*reconstruct) return tntz::run_reconstruct(rec_input, rec_output);
        if (*round) return tntz::run_round(rnd);
        if (*cross) return tntz::run_cross(crs);
        if (*benchmark) return tntz::run_benchmark(bench);
    } catch (const tntz::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const tntz::GateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numeric;
    } catch (const tnt::GuardError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numeric;
    } catch (const tnt::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return data;
    } catch (const tnt::ContractViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return data;
    } catch (const tnt::EvaluationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return data;
    }
    return usage;
}
