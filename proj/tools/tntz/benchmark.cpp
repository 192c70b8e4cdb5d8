#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "commands.hpp"

namespace tntz {

using tnt::DenseTensor;
using tnt::Index;
using tnt::Rng;
using tnt::TnTensor;

namespace {

constexpr Index gate_samples = 100;
constexpr double gate_tolerance = 1e-12;

// Entry of batch element b of a plain TT chain.
double entry(const TnTensor& t, Index b, std::span<const Index> idx) {
    std::vector<double> v{1.0}, next;
    for (Index k = 0; k < t.ndim(); ++k) {
        const auto& node = t.node(k);
        const DenseTensor& core = node.core();
        const Index rl = node.rank_left(), n = node.size(), rr = node.rank_right();
        const double* base = core.data().data() + (node.batched() ? b * rl * n * rr : 0) + idx[static_cast<std::size_t>(k)] * rr;
        next.assign(static_cast<std::size_t>(rr), 0.0);
        for (Index a = 0; a < rl; ++a) {
            const double va = v[static_cast<std::size_t>(a)];
            const double* row = base + a * n * rr;
            for (Index c = 0; c < rr; ++c) next[static_cast<std::size_t>(c)] += va * row[c];
        }
        v.swap(next);
    }
    return v[0];
}

bool is_plain(const TnTensor& t) { return t.all_tt() && !t.any_factor(); }

// Batch result element b against the loop result, on seeded random entries.
void check_equal(const std::string& op, Index size, const TnTensor& batched, Index b, const TnTensor& single,
                 Rng& rng) {
    if (!is_plain(batched) || !is_plain(single)) {
        check_equal(op, size, is_plain(batched) ? batched : tnt::absorb_factors(batched), b,
                    is_plain(single) ? single : tnt::absorb_factors(single), rng);
        return;
    }
    const TnTensor& x = batched;
    const TnTensor& y = single;
    const tnt::Shape shape = y.shape();
    double diff = 0.0, ref = 0.0;
    std::vector<Index> idx(shape.size());
    for (Index s = 0; s < gate_samples; ++s) {
        for (std::size_t k = 0; k < shape.size(); ++k) idx[k] = std::uniform_int_distribution<Index>(0, shape[k] - 1)(rng);
        const double u = entry(x, b, idx), v = entry(y, 0, idx);
        diff += (u - v) * (u - v);
        ref += v * v;
    }
    const double rel = ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
    if (!(rel <= gate_tolerance)) {
        std::ostringstream msg;
        msg << "correctness gate failed for " << op << " at I=" << size << ", item " << b << ": relative difference "
            << rel;
        throw GateError(msg.str());
    }
}

struct Case {
    // Runs the operation on every item separately.
    std::function<void()> loop;
    // Runs the batched operation once.
    std::function<void()> batch;
    // Compares batch output against per-item outputs.
    std::function<void(Rng&)> gate;
};

double estimate_bytes(const std::string& op, Index size, Index n, Index r, Index b) {
    const double I = static_cast<double>(size), R = static_cast<double>(r), B = static_cast<double>(b);
    if (op == "sum") return 8.0 * B * static_cast<double>(n) * 4.0 * R * R * I;
    if (op == "product") return 8.0 * (B + 1.0) * static_cast<double>(n) * R * R * R * R * I;
    if (op == "ttsvd") return 8.0 * 4.0 * B * std::pow(I, static_cast<double>(n));
    return 8.0 * 4.0 * B * static_cast<double>(n) * R * R * I;
}

Case make_case(const std::string& op, Index size, const BenchmarkArgs& args, Index n, Rng& rng) {
    const Index B = args.batch, R = args.rank;
    const tnt::Shape shape(static_cast<std::size_t>(n), size);
    auto items = [B](const TnTensor& t) {
        std::vector<TnTensor> out;
        for (Index b = 0; b < B; ++b) out.push_back(t.element(b));
        return out;
    };
    auto compare = [op, size, B](const TnTensor& batched, const std::vector<TnTensor>& singles, Rng& r) {
        for (Index b = 0; b < B; ++b) check_equal(op, size, batched, b, singles[static_cast<std::size_t>(b)], r);
    };

    if (op == "sum" || op == "product") {
        const auto a = std::make_shared<TnTensor>(tnt::random_tt_batched(B, shape, R, rng));
        const auto c = std::make_shared<TnTensor>(tnt::random_tt_batched(B, shape, R, rng));
        const auto ai = std::make_shared<std::vector<TnTensor>>(items(*a));
        const auto ci = std::make_shared<std::vector<TnTensor>>(items(*c));
        const bool is_sum = op == "sum";
        auto apply = [is_sum](const TnTensor& x, const TnTensor& y) { return is_sum ? tnt::add(x, y) : tnt::hadamard(x, y); };
        Case k;
        k.loop = [=] {
            for (Index b = 0; b < B; ++b) (void)apply((*ai)[static_cast<std::size_t>(b)], (*ci)[static_cast<std::size_t>(b)]);
        };
        k.batch = [=] { (void)apply(*a, *c); };
        k.gate = [=](Rng& r) {
            const TnTensor whole = apply(*a, *c);
            for (Index b = 0; b < B; ++b)
                check_equal(op, size, whole, b, apply((*ai)[static_cast<std::size_t>(b)], (*ci)[static_cast<std::size_t>(b)]), r);
        };
        return k;
    }
    if (op == "ttsvd") {
        const auto x = std::make_shared<DenseTensor>(tnt::full(tnt::random_tt_batched(B, shape, R, rng)));
        auto xi = std::make_shared<std::vector<DenseTensor>>();
        for (Index b = 0; b < B; ++b) xi->push_back(x->leading_slice(b));
        const auto spec = tnt::TruncationSpec::rank(R);
        Case k;
        k.loop = [=] {
            for (const auto& item : *xi) (void)tnt::tt_svd(item, spec);
        };
        k.batch = [=] { (void)tnt::tt_svd_batched(*x, spec); };
        k.gate = [=](Rng& r) {
            std::vector<TnTensor> singles;
            for (const auto& item : *xi) singles.push_back(tnt::tt_svd(item, spec));
            compare(tnt::tt_svd_batched(*x, spec), singles, r);
        };
        return k;
    }
    if (op == "cross") {
        const auto t = std::make_shared<TnTensor>(tnt::random_tt_batched(B, shape, R, rng));
        const auto ti = std::make_shared<std::vector<TnTensor>>(items(*t));
        tnt::CrossConfig cfg;
        cfg.initial_rank = R;
        cfg.max_rank = R;
        cfg.target_eps = 1e-10;
        cfg.max_iters = 2;
        cfg.seed = args.seed;
        const auto identity = [](double v) { return v; };
        Case k;
        k.loop = [=] {
            for (const auto& item : *ti) (void)tnt::elementwise(item, identity, cfg);
        };
        k.batch = [=] { (void)tnt::elementwise(*t, identity, cfg); };
        k.gate = [=](Rng& r) {
            std::vector<TnTensor> singles;
            for (const auto& item : *ti) singles.push_back(tnt::elementwise(item, identity, cfg));
            compare(tnt::elementwise(*t, identity, cfg), singles, r);
        };
        return k;
    }
    throw UsageError("unknown benchmark op '" + op + "'");
}

std::pair<double, double> time_it(const std::function<void()>& fn, Index warmup, Index repeats, Index batch) {
    for (Index w = 0; w < warmup; ++w) fn();
    std::vector<double> per_item;
    for (Index r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        per_item.push_back(elapsed.count() / static_cast<double>(batch));
    }
    const double mean = std::accumulate(per_item.begin(), per_item.end(), 0.0) / static_cast<double>(per_item.size());
    double var = 0.0;
    for (double v : per_item) var += (v - mean) * (v - mean);
    const double sd = per_item.size() > 1 ? std::sqrt(var / static_cast<double>(per_item.size() - 1)) : 0.0;
    return {mean, sd};
}

}  // namespace

int run_benchmark(const BenchmarkArgs& args) {
    if (args.sizes.empty() || args.rank < 1 || args.dims < 1 || args.ttsvd_dims < 1 || args.batch < 1 ||
        args.repeats < 1 || args.warmup < 0)
        throw UsageError("benchmark: sizes, rank, dims, batch and repeats must be positive");
    for (Index s : args.sizes)
        if (s < 1) throw UsageError("benchmark: sizes must be positive");
    const std::vector<std::string> ops =
        args.op == "all" ? std::vector<std::string>{"sum", "product", "ttsvd", "cross"} : std::vector<std::string>{args.op};
    std::vector<std::string> modes;
    if (args.mode == "loop" || args.mode == "both") modes.push_back("loop");
    if (args.mode == "batch" || args.mode == "both") modes.push_back("batch");
    if (modes.empty()) throw UsageError("benchmark: --mode must be loop, batch or both");

    std::ofstream file;
    if (!args.output.empty()) {
        file.open(args.output);
        if (!file) throw tnt::FormatError("cannot write '" + args.output + "'");
    }
    auto emit = [&](const std::string& line) {
        std::cout << line << "\n" << std::flush;
        if (file) file << line << "\n" << std::flush;
    };
    emit("op,I,N,R,B,mode,mean_seconds_per_item,std_seconds");

    for (const auto& op : ops) {
        const Index n = op == "ttsvd" ? args.ttsvd_dims : args.dims;
        for (Index size : args.sizes) {
            const double need = estimate_bytes(op, size, n, args.rank, args.batch);
            if (need > args.memory_limit_gb * 1e9) {
                std::ostringstream msg;
                msg << op << " at I=" << size << " needs about " << need / 1e9 << " GB (limit " << args.memory_limit_gb
                    << " GB); lower --batch or raise --memory-limit-gb";
                throw tnt::GuardError(msg.str());
            }
            Rng rng(args.seed * 1000003ULL + static_cast<std::uint64_t>(size));
            const Case c = make_case(op, size, args, n, rng);
            Rng gate_rng(args.seed + 17);
            c.gate(gate_rng);
            for (const auto& mode : modes) {
                const auto [mean, sd] = time_it(mode == "loop" ? c.loop : c.batch, args.warmup, args.repeats, args.batch);
                char buf[256];
                std::snprintf(buf, sizeof buf, "%s,%lld,%lld,%lld,%lld,%s,%.6e,%.6e", op.c_str(),
                              static_cast<long long>(size), static_cast<long long>(n),
                              static_cast<long long>(args.rank), static_cast<long long>(args.batch), mode.c_str(), mean,
                              sd);
                emit(buf);
            }
        }
    }
    return 0;
}

}  // namespace tntz
