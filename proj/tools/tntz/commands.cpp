#include "commands.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tntz {

using tnt::DenseTensor;
using tnt::Index;
using tnt::TnTensor;

namespace {

constexpr Index error_check_limit = 1'000'000;
constexpr Index reconstruct_limit = 100'000'000;

Index payload_doubles(const TnTensor& t) {
    Index n = 0;
    for (const auto& node : t.nodes()) {
        n += node.core().numel();
        if (node.has_factor()) n += node.factor().numel();
    }
    return n;
}

void print_summary(const TnTensor& t) {
    std::cout << "shape: " << format_list(t.shape()) << "\n";
    if (t.batched()) std::cout << "batch: " << t.batch_count() << "\n";
    std::cout << "ranks: " << format_list(t.ranks()) << "\n";
    std::cout << "dof: " << t.dof() << "\n";
    const double dense_bytes = 8.0 * static_cast<double>(t.numel()) * static_cast<double>(t.batch_count());
    std::cout << "compression: " << dense_bytes / (8.0 * static_cast<double>(payload_doubles(t))) << "\n";
}

tnt::TruncationSpec truncation(double eps, Index rank) {
    if (rank > 0) return tnt::TruncationSpec::rank(rank);
    return tnt::TruncationSpec::relative(eps);
}

}  // namespace

std::string format_list(const std::vector<Index>& v) {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
    out << "]";
    return out.str();
}

int run_decompose(const DecomposeArgs& args) {
    if (args.shape.empty()) throw UsageError("--shape is required");
    if (args.batch < 0) throw UsageError("--batch must be positive");
    tnt::Shape file_shape = args.shape;
    if (args.batch > 0) file_shape.insert(file_shape.begin(), args.batch);
    const DenseTensor x = tnt::read_dense(args.input, file_shape);

    auto decompose_one = [&](const DenseTensor& item) -> TnTensor {
        if (args.format == "tt") return tnt::tt_svd(item, truncation(args.eps, args.rank));
        if (args.format == "tucker") return tnt::tucker_hosvd(item, truncation(args.eps, args.rank));
        if (args.format == "cp") {
            if (args.rank <= 0) throw UsageError("--format cp needs --rank");
            tnt::CpAlsOptions opts;
            opts.rank = args.rank;
            opts.seed = args.seed;
            return tnt::cp_als(item, opts).tensor;
        }
        throw UsageError("unknown format '" + args.format + "'");
    };

    TnTensor t = [&] {
        if (args.batch == 0) return decompose_one(x);
        if (args.format == "tt") return tnt::tt_svd_batched(x, truncation(args.eps, args.rank));
        if (args.format == "cp") {
            std::vector<TnTensor> items;
            for (Index b = 0; b < args.batch; ++b) items.push_back(decompose_one(x.leading_slice(b)));
            return TnTensor::stack(items);
        }
        throw UsageError("--batch is only supported for tt and cp");
    }();

    tnt::save(t, args.output);
    print_summary(t);
    if (t.numel() <= error_check_limit) {
        std::vector<double> errors;
        for (Index b = 0; b < t.batch_count(); ++b) {
            const DenseTensor item = args.batch > 0 ? x.leading_slice(b) : x;
            errors.push_back(tnt::relative_error(tnt::full(t.batched() ? t.element(b) : t), item));
        }
        std::cout << "relative_error: " << *std::max_element(errors.begin(), errors.end()) << "\n";
        if (t.batched()) {
            std::cout << "relative_error_per_item:";
            for (double e : errors) std::cout << " " << e;
            std::cout << "\n";
        }
    } else {
        std::cout << "relative_error: skipped (more than " << error_check_limit << " entries)\n";
    }
    return 0;
}

int run_info(const std::string& input) {
    const auto header = nlohmann::json::parse(tnt::read_header(input));
    const std::string kind = header.at("kind");
    std::cout << "kind: " << kind << "\n";
    const tnt::Container object = tnt::load(input);
    if (const auto* t = std::get_if<TnTensor>(&object)) {
        std::cout << "ndim: " << t->ndim() << "\n";
        std::cout << "nodes:";
        for (const auto& node : t->nodes()) std::cout << " " << (node.is_cp() ? "cp" : "tt") << (node.has_factor() ? "+tucker" : "");
        std::cout << "\n";
        print_summary(*t);
    } else if (const auto* m = std::get_if<tnt::TTMatrix>(&object)) {
        std::cout << "row_dims: " << format_list(m->row_dims()) << "\n";
        std::cout << "col_dims: " << format_list(m->col_dims()) << "\n";
        std::cout << "ranks: " << format_list(m->ranks()) << "\n";
    } else {
        const auto& c = std::get<tnt::CPMatrix>(object);
        std::cout << "row_dims: " << format_list(c.row_dims()) << "\n";
        std::cout << "col_dims: " << format_list(c.col_dims()) << "\n";
        std::cout << "rank: " << c.rank() << "\n";
    }
    std::cout << "payload_bytes: " << header.at("payload_bytes").get<std::uint64_t>() << "\n";
    std::cout << "crc32: " << header.at("crc32").get<std::uint64_t>() << "\n";
    return 0;
}

int run_reconstruct(const std::string& input, const std::string& output) {
    const TnTensor t = tnt::load_tensor(input);
    const Index total = t.numel() * t.batch_count();
    if (total > reconstruct_limit)
        throw tnt::GuardError("reconstruction would need " + std::to_string(total) + " entries (limit " +
                              std::to_string(reconstruct_limit) + ")");
    const DenseTensor x = tnt::full(t);
    tnt::write_dense(x, output);
    std::cout << "shape: " << format_list(x.shape()) << "\n";
    return 0;
}

int run_round(const RoundArgs& args) {
    const TnTensor t = tnt::load_tensor(args.input);
    const TnTensor r = tnt::round(t, truncation(args.eps, args.rank));
    tnt::save(r, args.output);
    std::cout << "ranks: " << format_list(t.ranks()) << " -> " << format_list(r.ranks()) << "\n";
    if (args.rank > 0)
        std::cout << "error_bound: none (rank cap " << args.rank << ")\n";
    else
        std::cout << "error_bound: " << args.eps << "\n";
    return 0;
}

int run_cross(const CrossArgs& args) {
    if (args.shape.empty()) throw UsageError("--shape is required");
    const tnt::BlackBox f = make_function(args.function, args.shape);
    tnt::CrossConfig cfg;
    cfg.target_eps = args.eps;
    cfg.seed = args.seed;
    cfg.max_iters = args.max_iters;
    cfg.validation_size = args.validation_size;
    const tnt::CrossResult r = tnt::cross_approximate(f, args.shape, cfg);
    if (!args.output.empty()) tnt::save(r.tensor, args.output);
    std::cout << "ranks: " << format_list(r.tensor.ranks()) << "\n";
    std::cout << "evaluations: " << r.log.total_evaluations << "\n";
    std::cout << "validation_error: " << r.log.validation_error << "\n";
    std::cout << "sweeps: " << r.log.sweeps << "\n";
    std::cout << "best_index: " << format_list(r.log.best_index) << "\n";
    std::cout << "best_value: " << r.log.best_value << "\n";
    return 0;
}

}  // namespace tntz
