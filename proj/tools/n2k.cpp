// n2k — blind denoising toolkit: invariant-network training, noise
// synthesis, receptive-field analysis, and evaluation. Exit codes: 0 on
// success, 1 on validation failure, 2 on usage errors.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "n2k/config.hpp"
#include "n2k/gradcheck.hpp"
#include "n2k/image_io.hpp"
#include "n2k/metrics.hpp"
#include "n2k/model.hpp"
#include "n2k/network.hpp"
#include "n2k/noise.hpp"
#include "n2k/parallel.hpp"
#include "n2k/receptive_field.hpp"
#include "n2k/train.hpp"
#include "n2k/version.hpp"

namespace fs = std::filesystem;

namespace {

bool is_image_path(const fs::path& p) {
    const std::string ext = p.extension().string();
    return ext == ".pgm" || ext == ".png";
}

// Single file or every image in a directory, sorted by filename so runs are
// order-stable.
std::vector<fs::path> list_images(const std::string& in) {
    const fs::path p(in);
    if (fs::is_regular_file(p)) return {p};
    if (!fs::is_directory(p)) throw n2k::ConfigError("no such file or directory: " + in);
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_regular_file() && is_image_path(entry.path())) paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw n2k::ConfigError("no .pgm/.png images in " + in);
    return paths;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw n2k::ConfigError("cannot write " + path.string());
    out << text;
}

struct CorruptArgs {
    std::string in, out, kind, sp_mode = "mixed";
    double sigma_g = 0.0, sigma_s = 0.0, density = 0.0;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

int run_corrupt(const CorruptArgs& args) {
    n2k::set_num_threads(args.threads ? args.threads : 1);
    n2k::NoiseSpec base;
    base.kind = n2k::noise_kind_from(args.kind);
    base.sigma_g = args.sigma_g;
    base.sigma_s = args.sigma_s;
    base.density = args.density;
    base.sp_mode = args.sp_mode == "separate" ? n2k::SaltPepperMode::kSeparate
                                              : n2k::SaltPepperMode::kMixed;
    base.seed = args.seed;
    base.validate();

    const auto paths = list_images(args.in);
    fs::create_directories(args.out);
    for (std::size_t idx = 0; idx < paths.size(); ++idx) {
        const n2k::Tensor x = n2k::decode_image(paths[idx].string());
        n2k::NoiseSpec per_image = base;
        per_image.seed = n2k::derive_seed(args.seed, idx);
        const n2k::Tensor y = n2k::apply_noise(per_image, x);
        const fs::path out_path = fs::path(args.out) / paths[idx].filename();
        n2k::encode_image(out_path.string(), y);
        write_text(out_path.string() + ".noise.txt",
                   n2k::noise_spec_to_text(per_image) + "# master_seed " +
                       std::to_string(args.seed) + "\n# tool n2k " + n2k::kVersion + "\n");
    }
    std::cout << "corrupted " << paths.size() << " image(s) -> " << args.out << "\n";
    return 0;
}

struct TrainArgs {
    std::string data, out, config_path, val_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t threads = 0;
    bool threads_set = false;
};

int run_train(const TrainArgs& args) {
    n2k::TrainConfig cfg;
    if (!args.config_path.empty())
        cfg = n2k::parse_train_config(n2k::read_file_bytes(args.config_path));
    if (args.seed_set) cfg.seed = args.seed;
    cfg.validate();
    // worker count is an execution knob, never part of the echoed config:
    // artifacts must be byte-identical at any worker count
    const std::size_t threads = args.threads_set ? args.threads : cfg.threads;
    n2k::set_num_threads(threads ? threads : 1);

    std::vector<n2k::Tensor> images;
    for (const auto& p : list_images(args.data)) images.push_back(n2k::decode_image(p.string()));
    const std::vector<n2k::Tensor> noisy =
        cfg.precorrupted() ? images : n2k::corrupt_dataset(images, cfg.noise());

    n2k::Tensor val_clean, val_noisy;
    const bool with_val = !args.val_path.empty();
    if (with_val) {
        if (cfg.precorrupted())
            throw n2k::ConfigError(
                "--val needs a configured noise model (the validation image is corrupted "
                "internally)");
        val_clean = n2k::decode_image(args.val_path);
        n2k::NoiseSpec vspec = cfg.noise();
        vspec.seed = n2k::derive_seed(cfg.seed, 0x7A11DA7E);
        val_noisy = n2k::apply_noise(vspec, val_clean);
    }

    const n2k::NetworkSpec spec = n2k::build_default_n2k(cfg.width, cfg.depth);
    n2k::ModelParams params = n2k::init_params(spec, n2k::derive_seed(cfg.seed, 0x1217));
    const n2k::TrainResult result =
        n2k::train(params, noisy, cfg.settings(), with_val ? &val_noisy : nullptr,
                   with_val ? &val_clean : nullptr);

    fs::create_directories(args.out);
    write_text(fs::path(args.out) / "resolved_config.txt", n2k::resolved_config_text(cfg));
    write_text(fs::path(args.out) / "VERSION", std::string(n2k::kVersion) + "\n");
    std::string log;
    for (const auto& record : result.log) log += record.to_line() + "\n";
    write_text(fs::path(args.out) / "metrics.log", log);
    n2k::save_checkpoint(params, (fs::path(args.out) / "checkpoint.n2k").string());

    if (!result.log.empty())
        std::cout << "trained " << result.log.size() << " epoch(s), final "
                  << result.log.back().to_line() << "\n";
    std::cout << "run artifacts in " << args.out << "\n";
    return 0;
}

struct DenoiseArgs {
    std::string checkpoint, in, out;
    bool tta = false;
    std::size_t threads = 0;
};

int run_denoise(const DenoiseArgs& args) {
    n2k::set_num_threads(args.threads ? args.threads : 1);
    const n2k::ModelParams params = n2k::load_checkpoint(args.checkpoint);
    const auto paths = list_images(args.in);
    fs::create_directories(args.out);
    for (const auto& p : paths) {
        const n2k::Tensor x = n2k::decode_image(p.string());
        const n2k::Tensor y = args.tta ? n2k::tta_denoise(params, x) : n2k::forward(params, x);
        n2k::encode_image((fs::path(args.out) / p.filename()).string(), y);
    }
    std::cout << "denoised " << paths.size() << " image(s) -> " << args.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string pred, ref, csv;
};

int run_eval(const EvalArgs& args) {
    const auto pred_paths = list_images(args.pred);
    const auto ref_paths = list_images(args.ref);
    if (pred_paths.size() != ref_paths.size())
        throw n2k::ConfigError("eval: " + std::to_string(pred_paths.size()) +
                               " prediction(s) vs " + std::to_string(ref_paths.size()) +
                               " reference(s)");
    std::string csv = "name,psnr_db,ssim,mean_shift\n";
    double sum_psnr = 0.0, sum_ssim = 0.0, sum_shift = 0.0;
    for (std::size_t k = 0; k < pred_paths.size(); ++k) {
        const n2k::Tensor pred = n2k::decode_image(pred_paths[k].string());
        const n2k::Tensor ref = n2k::decode_image(ref_paths[k].string());
        const n2k::EvalReport report = n2k::evaluate(pred, ref);
        const std::string name = pred_paths[k].filename().string();
        std::cout << name << ":\n" << report.to_text();
        csv += report.csv_row(name) + "\n";
        sum_psnr += report.psnr_db;
        sum_ssim += report.ssim_value;
        sum_shift += report.mean_shift;
    }
    if (pred_paths.size() > 1) {
        const double n = double(pred_paths.size());
        std::cout << "mean:\npsnr_db " << n2k::format_double(sum_psnr / n) << "\nssim "
                  << n2k::format_double(sum_ssim / n) << "\nmean_shift "
                  << n2k::format_double(sum_shift / n) << "\n";
    }
    if (!args.csv.empty()) write_text(args.csv, csv);
    return 0;
}

struct AnalyzeArgs {
    std::string spec_path, emit_path;
    bool use_default = false;
    std::size_t width = 32, depth = 4;
    int donut_k = 3;
    std::vector<int> dilations = {2, 3};
    bool unflagged = false;
    bool sweep = false;
};

int run_analyze(const AnalyzeArgs& args) {
    if (args.sweep) {
        const auto rows = n2k::dilation_condition_sweep({3, 5, 7, 9}, {1, 2, 3, 4, 5}, 8);
        std::cout << n2k::sweep_to_text(rows);
        for (const auto& row : rows)
            if (row.predicate && !row.enumeration) return 1;
        return 0;
    }
    n2k::NetworkSpec spec;
    if (!args.spec_path.empty()) {
        spec = n2k::spec_from_text(n2k::read_file_bytes(args.spec_path));
    } else if (args.use_default) {
        if (args.dilations.size() != 2)
            throw n2k::ConfigError("--dilations wants two values, e.g. 2,3");
        spec = n2k::build_n2k(args.width, args.depth, args.donut_k, args.dilations[0],
                              args.dilations[1], !args.unflagged);
    } else {
        throw n2k::ConfigError("analyze: give a spec file or --default");
    }
    if (!args.emit_path.empty()) write_text(args.emit_path, n2k::spec_to_text(spec));
    const n2k::DependencyReport report = n2k::check_invariance_static(spec);
    std::cout << report.to_text();
    if (spec.meta().invariant_by_construction && !report.invariant) return 1;
    return 0;
}

int run_gradcheck(int cases, std::uint64_t seed) {
    const auto results = n2k::run_gradient_suite(cases, seed);
    bool ok = true;
    for (const auto& res : results) {
        std::cout << res.name << ": max_rel_err=" << n2k::format_double(res.max_rel_err)
                  << " tol=" << n2k::format_double(res.tol) << " cases=" << res.cases << " "
                  << (res.pass() ? "PASS" : "FAIL") << "\n";
        ok = ok && res.pass();
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"n2k: blind denoising with an invariant dilated-convolution network"};
    app.set_version_flag("--version", std::string("n2k ") + n2k::kVersion);
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear before or after the subcommand

    std::uint64_t global_seed = 0;
    std::string global_config;
    auto* seed_opt = app.add_option("--seed", global_seed, "master seed");
    app.add_option("--config", global_config, "config file (key = value)");

    CorruptArgs corrupt_args;
    auto* corrupt = app.add_subcommand("corrupt", "apply a noise model to images");
    corrupt->add_option("--in", corrupt_args.in, "input image or directory")->required();
    corrupt->add_option("--out", corrupt_args.out, "output directory")->required();
    corrupt->add_option("--kind", corrupt_args.kind, "awgn|speckle|salt-pepper|fusion")
        ->required();
    corrupt->add_option("--sigma-g", corrupt_args.sigma_g, "gaussian sigma (0..255 scale)");
    corrupt->add_option("--sigma-s", corrupt_args.sigma_s, "speckle sigma (0..255 scale)");
    corrupt->add_option("--density", corrupt_args.density, "salt-pepper density in [0,1]");
    corrupt->add_option("--sp-mode", corrupt_args.sp_mode, "mixed|separate");
    corrupt->add_option("--threads", corrupt_args.threads, "worker count");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a model on noisy images");
    train->add_option("--data", train_args.data, "training image directory")->required();
    train->add_option("--out", train_args.out, "run output directory")->required();
    train->add_option("--val", train_args.val_path, "clean validation image");
    auto* threads_opt = train->add_option("--threads", train_args.threads, "worker count");

    DenoiseArgs denoise_args;
    auto* denoise = app.add_subcommand("denoise", "denoise images with a checkpoint");
    denoise->add_option("--checkpoint", denoise_args.checkpoint, "checkpoint file")->required();
    denoise->add_option("--in", denoise_args.in, "input image or directory")->required();
    denoise->add_option("--out", denoise_args.out, "output directory")->required();
    denoise->add_flag("--tta", denoise_args.tta, "8-fold dihedral test-time averaging");
    denoise->add_option("--threads", denoise_args.threads, "worker count");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "PSNR/SSIM/brightness-shift report");
    eval->add_option("--pred", eval_args.pred, "prediction image or directory")->required();
    eval->add_option("--ref", eval_args.ref, "reference image or directory")->required();
    eval->add_option("--csv", eval_args.csv, "also write a CSV report");

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "prove or refute J-invariance of a spec");
    analyze->add_option("spec", analyze_args.spec_path, "network spec file");
    analyze->add_flag("--default", analyze_args.use_default, "analyze a built n2k topology");
    analyze->add_option("--width", analyze_args.width, "channel width (with --default)");
    analyze->add_option("--depth", analyze_args.depth, "path depth (with --default)");
    analyze->add_option("--donut-k", analyze_args.donut_k, "donut kernel size");
    analyze->add_option("--dilations", analyze_args.dilations, "path dilations, e.g. 2,3")
        ->delimiter(',');
    analyze->add_flag("--unflagged", analyze_args.unflagged,
                      "build without the invariant-by-construction flag");
    analyze->add_option("--emit", analyze_args.emit_path, "write the spec text to a file");
    analyze->add_flag("--sweep", analyze_args.sweep,
                      "sweep K in {3,5,7,9}, d in 1..5, depth 1..8 against enumeration");

    int gradcheck_cases = 100;
    std::uint64_t gradcheck_seed = 20240101;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    gradcheck->add_option("--cases", gradcheck_cases, "cases per operation");
    gradcheck->add_option("--seed", gradcheck_seed, "suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*corrupt) {
            corrupt_args.seed = global_seed;
            return run_corrupt(corrupt_args);
        }
        if (*train) {
            train_args.seed = global_seed;
            train_args.seed_set = seed_opt->count() > 0;
            train_args.config_path = global_config;
            train_args.threads_set = threads_opt->count() > 0;
            return run_train(train_args);
        }
        if (*denoise) return run_denoise(denoise_args);
        if (*eval) return run_eval(eval_args);
        if (*analyze) return run_analyze(analyze_args);
        if (*gradcheck) return run_gradcheck(gradcheck_cases, gradcheck_seed);
    } catch (const n2k::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const n2k::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const n2k::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
