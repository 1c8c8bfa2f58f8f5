#include "favis/cli.hpp"

#include "favis/error.hpp"
#include "favis/estimator.hpp"
#include "favis/io.hpp"
#include "favis/service.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <csignal>
#include <iomanip>

namespace favis {

namespace {

struct UsageError {
    std::string message;
};

std::atomic<HttpServer*> active_server{nullptr};

extern "C" void stop_active_server(int) {
    if (auto* server = active_server.load()) {
        server->stop();
    }
}

void print_warnings(std::ostream& out, const std::vector<std::string>& warnings) {
    for (const auto& warning : warnings) {
        out << "warning: " << warning << '\n';
    }
}

std::optional<Codebook> load_codebook(const std::string& path, std::ostream& out) {
    if (path.empty()) {
        return std::nullopt;
    }
    auto result = read_codebook(path);
    print_warnings(out, result.warnings);
    return std::move(result.codebook);
}

// A model plus the codebook that travels with it, from exactly one of
// --bundle / --loadings, with --codebook overriding the bundle's codebook.
struct Input {
    FactorModel model;
    std::optional<Codebook> codebook;
};

Input load_input(const std::string& bundle_path, const std::string& loadings_path, const std::string& codebook_path,
                 std::ostream& out) {
    if (bundle_path.empty() == loadings_path.empty()) {
        throw UsageError{"exactly one of --bundle and --loadings is required"};
    }
    auto codebook = load_codebook(codebook_path, out);
    if (!bundle_path.empty()) {
        auto bundle = read_bundle(bundle_path);
        return {std::move(bundle.model), codebook ? std::move(codebook) : std::move(bundle.codebook)};
    }
    auto loaded = read_loadings_csv(loadings_path);
    print_warnings(out, loaded.warnings);
    return {std::move(loaded.model), std::move(codebook)};
}

struct FitArgs {
    std::string data;
    int factors = 1;
    std::string method = "ml";
    std::string rotation = "none";
    std::optional<double> gamma;
    std::uint64_t seed = 1;
    double alpha = 0.3;
    std::string codebook;
    std::string out;
};

int run_fit(const FitArgs& args, std::ostream& out) {
    const auto rotation = parse_rotation_kind(args.rotation);
    if (args.gamma && rotation != RotationKind::oblimin) {
        throw UsageError{"--gamma applies only to --rotation oblimin"};
    }
    auto data = read_dataset_csv(args.data);
    print_warnings(out, data.warnings);
    const auto corr = correlation_matrix(data.dataset);

    FitOptions options;
    options.n_factors = args.factors;
    auto model = args.method == "ppca" ? fit_ppca(corr, options, data.dataset.variable_names())
                                       : fit_ml_efa(corr, options, data.dataset.variable_names());
    RotationOptions rotate;
    rotate.seed = args.seed;
    if (rotation == RotationKind::varimax) {
        model = rotate_varimax(model, rotate);
    } else if (rotation == RotationKind::oblimin) {
        model = rotate_oblimin(model, args.gamma.value_or(0.0), rotate);
    }

    const auto& diagnostics = model.diagnostics();
    out << "method: " << args.method << '\n';
    out << "observations: " << data.dataset.observation_count() << '\n';
    out << "factors: " << model.factor_count() << '\n';
    out << "rotation: " << to_string(model.rotation().kind) << '\n';
    if (diagnostics) {
        out << "iterations: " << diagnostics->iterations << '\n';
        out << "objective: ";
        if (diagnostics->objective) {
            out << std::setprecision(10) << *diagnostics->objective << '\n';
        } else {
            out << "n/a\n";
        }
        out << "converged: " << (diagnostics->converged ? "true" : "false") << '\n';
    }
    print_warnings(out, model.warnings());

    const auto bundle = make_bundle(std::move(model), load_codebook(args.codebook, out), args.alpha);
    write_bundle(bundle, args.out);
    out << "wrote " << args.out << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fit exploratory factor models and explore their loadings."};
    app.name("favis");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a factor model to a dataset CSV and write a bundle");
    fit_cmd->add_option("--data", fit.data, "Dataset CSV with a header row")->required();
    fit_cmd->add_option("--factors", fit.factors, "Number of factors")->check(CLI::PositiveNumber)->capture_default_str();
    fit_cmd->add_option("--method", fit.method, "Estimator")->check(CLI::IsMember({"ml", "ppca"}))->capture_default_str();
    fit_cmd->add_option("--rotation", fit.rotation, "Rotation")
        ->check(CLI::IsMember({"none", "varimax", "oblimin"}))
        ->capture_default_str();
    fit_cmd->add_option("--gamma", fit.gamma, "Oblimin obliqueness parameter");
    fit_cmd->add_option("--seed", fit.seed, "Seed for rotation restarts")->capture_default_str();
    fit_cmd->add_option("--alpha", fit.alpha, "Threshold stored in the bundle")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    fit_cmd->add_option("--codebook", fit.codebook, "Codebook JSON to embed");
    fit_cmd->add_option("--out", fit.out, "Bundle path to write")->required();

    std::string bundle_path;
    std::string loadings_path;
    std::string codebook_path;
    std::string out_path;
    double alpha = 0.3;
    auto* analyze_cmd = app.add_subcommand("analyze", "Write the analytics document for a model");
    analyze_cmd->add_option("--bundle", bundle_path, "Bundle JSON");
    analyze_cmd->add_option("--loadings", loadings_path, "Loadings CSV");
    analyze_cmd->add_option("--alpha", alpha, "Loading threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
    analyze_cmd->add_option("--codebook", codebook_path, "Codebook JSON (overrides the bundle's)");
    analyze_cmd->add_option("--out", out_path, "Output path; standard output if omitted");

    std::optional<int> port;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API for a bundle on 127.0.0.1");
    serve_cmd->add_option("--bundle", bundle_path, "Bundle JSON")->required();
    serve_cmd->add_option("--port", port, "TCP port (default $FAVIS_PORT, else 8765)")->check(CLI::Range(0, 65535));

    auto* export_cmd = app.add_subcommand("export", "Convert a model to a loadings CSV or a bundle");
    export_cmd->add_option("--bundle", bundle_path, "Bundle JSON");
    export_cmd->add_option("--loadings", loadings_path, "Loadings CSV");
    export_cmd->add_option("--alpha", alpha, "Threshold for a bundle output")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    export_cmd->add_option("--codebook", codebook_path, "Codebook JSON for a bundle output");
    export_cmd->add_option("--out", out_path, "Output path ending in .csv or .json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit_cmd->parsed()) {
            return run_fit(fit, out);
        }
        if (analyze_cmd->parsed()) {
            const auto input = load_input(bundle_path, loadings_path, codebook_path, err);
            const auto document =
                render_analytics_document(input.model, input.codebook ? &*input.codebook : nullptr, Threshold(alpha));
            if (out_path.empty()) {
                out << document;
            } else {
                write_text_file_atomic(out_path, document);
            }
            return 0;
        }
        if (export_cmd->parsed()) {
            const auto extension = std::filesystem::path(out_path).extension();
            if (extension != ".csv" && extension != ".json") {
                throw UsageError{"--out must end in .csv or .json"};
            }
            auto input = load_input(bundle_path, loadings_path, codebook_path, out);
            if (extension == ".csv") {
                write_loadings_csv(input.model, out_path);
            } else {
                write_bundle(make_bundle(std::move(input.model), std::move(input.codebook), alpha), out_path);
            }
            out << "wrote " << out_path << '\n';
            return 0;
        }
        const Service service{std::filesystem::path(bundle_path)};
        HttpServer server(service);
        const int bound = server.bind("127.0.0.1", resolve_port(port));
        out << "serving " << bundle_path << " on http://127.0.0.1:" << bound << '\n' << std::flush;
        active_server = &server;
        std::signal(SIGINT, stop_active_server);
        std::signal(SIGTERM, stop_active_server);
        server.run();
        active_server = nullptr;
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.message << '\n';
        return 2;
    } catch (const std::exception& e) {
        // Library errors already lead with their code name.
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace favis
