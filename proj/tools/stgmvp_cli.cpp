#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "stgmvp/errors.hpp"
#include "stgmvp/experiments.hpp"

namespace {

stgmvp::Json read_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw stgmvp::ValidationError("spec file not found: " + path.string());
    try {
        return stgmvp::Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw stgmvp::ParseError(path.string() + ": invalid JSON: " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shrinkage-Tyler GMVP experiments"};
    app.require_subcommand(1);

    std::string spec_path, out_dir = "out";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    for (const char* name : {"simulate", "calibrate", "backtest", "boottest"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--spec", spec_path, "JSON spec file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the spec seed");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    }
    CLI11_PARSE(app, argc, argv);

    const auto* sub = app.get_subcommands().front();
    try {
        stgmvp::RunContext ctx;
        ctx.out_dir = out_dir;
        ctx.base_dir = std::filesystem::path(spec_path).parent_path();
        if (sub->count("--seed") > 0) ctx.seed_override = seed;
        ctx.threads = threads;
        const auto out = stgmvp::run_command(sub->get_name(), read_spec(spec_path), ctx);
        for (const auto& f : out.files) std::cout << f.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
