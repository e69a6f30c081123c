#include <iostream>

#include "CLI11.hpp"
#include "cli/commands.hpp"

namespace cli = pairdesign::cli;

int main(int argc, char** argv) {
    CLI::App app{"Experimental designs for two-arm trials with binary outcomes"};
    app.require_subcommand(1);

    cli::GlobalOptions global;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Master seed");
        sub->add_option("--threads", global.threads, "Worker threads (0 = all cores)");
        sub->add_option("--out", global.out, "Output directory");
        sub->add_option("--format", global.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };

    cli::DesignArgs design;
    auto* design_cmd = app.add_subcommand("design", "Build matches or blocks and sample an allocation");
    design_cmd->add_option("input", design.input, "CSV with header id,x1,...,xd")->required();
    design_cmd->add_option("--method", design.method, "pm, block or bcrd")
        ->check(CLI::IsMember({"pm", "block", "bcrd"}));
    design_cmd->add_option("--blocks", design.blocks, "Number of blocks for --method block");
    design_cmd->add_option("--sort-key", design.sort_key, "Match or block on this column only");
    add_common(design_cmd);

    cli::EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Exact MSE of designs for known probabilities");
    evaluate_cmd->add_option("input", evaluate.input, "CSV with header id,p_t,p_c")->required();
    evaluate_cmd->add_option("--designs", evaluate.designs, "bcrd, pm, block:B")->delimiter(',');
    evaluate_cmd->add_option("--matches", evaluate.matches, "matches.csv to use for pm");
    add_common(evaluate_cmd);

    cli::SimulateArgs simulate;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo comparison of designs");
    simulate_cmd->add_option("config", simulate.config, "key = value config file")->required();
    add_common(simulate_cmd);

    cli::VerifyArgs verify;
    std::size_t verify_n = 0;
    auto* verify_cmd = app.add_subcommand("verify", "Run the brute-force verification checks");
    verify_cmd->add_option("--only", verify.only, "Checks to run")->delimiter(',');
    verify_cmd->add_option("--n", verify_n, "Subject count for every selected check");
    verify_cmd->add_flag("--inject-wrong-sigma", verify.inject_wrong_sigma,
                         "Perturb the closed-form covariance (exercises the failure path)");
    add_common(verify_cmd);

    CLI11_PARSE(app, argc, argv);

    for (auto* sub : app.get_subcommands()) {
        if (sub->count("--seed") > 0) global.seed = seed;
    }
    if (verify_cmd->count("--n") > 0) verify.n_subjects = verify_n;

    try {
        if (*design_cmd) return cli::cmd_design(global, design, std::cout);
        if (*evaluate_cmd) return cli::cmd_evaluate(global, evaluate, std::cout);
        if (*simulate_cmd) return cli::cmd_simulate(global, simulate, std::cout);
        return cli::cmd_verify(global, verify, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
