#include "lwoct/annotate.hpp"
#include "lwoct/config.hpp"
#include "lwoct/io/portable.hpp"
#include "lwoct/io/record.hpp"
#include "lwoct/io/report.hpp"
#include "lwoct/metrics.hpp"
#include "lwoct/phantom.hpp"
#include "lwoct/protocol.hpp"
#include "lwoct/service.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace lwoct;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

PipelineConfig resolve_config(const std::string& flag)
{
    std::string path = flag;
    if (path.empty())
        if (const char* env = std::getenv("LIVEWIRE_OCT_CONFIG"))
            path = env;
    return path.empty() ? PipelineConfig::defaults() : load_config(path);
}

int run_convert(const std::string& input, const std::string& out)
{
    const auto volume = load_volume_any(input);
    const auto manifest = io::save_portable(volume, out);
    std::printf("%s: %zu B-scans %dx%d -> %s\n", volume.id.c_str(), volume.bscans.size(), volume.width(),
                volume.height(), manifest.string().c_str());
    return 0;
}

// clicks file: {"grader_id": "...", "slices": [{"bscan_index": 0, "boundaries": {"ILM": [[x, y], ...]}}]}
int run_segment_grid(const std::string& volume_path, const std::string& clicks_path, const std::string& out)
{
    const auto volume = load_volume_any(volume_path);
    const auto clicks = io::read_json_file(clicks_path);
    const auto grader = clicks.value("grader_id", std::string{});
    int failed = 0, written = 0;
    for (const auto& slice : clicks.at("slices")) {
        const int index = slice.at("bscan_index").get<int>();
        if (index < 0 || index >= static_cast<int>(volume.bscans.size())) {
            std::fprintf(stderr, "slice %d: out_of_bounds: volume has %zu B-scans\n", index, volume.bscans.size());
            ++failed;
            continue;
        }
        const auto& bscan = volume.bscans[static_cast<std::size_t>(index)];
        SegmentationRecord record;
        record.volume_id = volume.id;
        record.bscan_index = index;
        record.grader_id = grader;
        for (const auto& [name, points] : slice.at("boundaries").items()) {
            try {
                const auto id = boundary_from_string(name);
                std::vector<Anchor> anchors;
                for (const auto& p : points)
                    anchors.push_back({p.at(0).get<int>(), p.at(1).get<double>(), 0.0});
                const auto result = grid_boundary(id, anchors, bscan.width(), bscan.height());
                if (result.clamped)
                    std::fprintf(stderr, "slice %d %s: spline clamped to the image rows\n", index, name.c_str());
                record.session_stats[id] = {0.0, result.boundary.click_count};
                record.boundaries[id] = result.boundary;
            } catch (const Error& e) {
                std::fprintf(stderr, "slice %d %s: %s\n", index, name.c_str(), e.what());
                ++failed;
            }
        }
        io::export_record(record, bscan, out);
        ++written;
    }
    std::printf("%d records written to %s\n", written, out.c_str());
    return failed == 0 ? 0 : kExitData;
}

int run_evaluate(const std::string& a_path, const std::string& b_path, const std::vector<std::string>& graders,
                 const std::string& out)
{
    const auto a = io::load_records(a_path);
    std::vector<SegmentationRecord> b;
    if (!graders.empty()) {
        std::vector<std::vector<SegmentationRecord>> sets;
        for (const auto& g : graders)
            sets.push_back(io::load_records(g));
        b = gold_standard_records(sets);
        fs::create_directories(out);
        io::write_text_file(fs::path(out) / "gold_standard.json", [&] {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& r : b)
                arr.push_back(io::to_json(r));
            return arr.dump(2) + "\n";
        }());
    } else {
        b = io::load_records(b_path);
    }
    const auto report = evaluate(a, b);
    const auto files = io::write_metrics_report(report, out);
    for (const auto& m : report.boundaries)
        std::printf("%-10s n=%zu mean unsigned error %.3f px, BA mean %.3f [%.3f, %.3f]\n",
                    std::string(to_string(m.id)).c_str(), m.scans.size(), m.mean_unsigned_error, m.bland_altman.mean_diff,
                    m.bland_altman.loa_low, m.bland_altman.loa_high);
    std::printf("%zu files written to %s\n", files.size(), out.c_str());
    return 0;
}

int run_phantom(const std::string& spec_path, const std::string& preset, std::uint64_t seed, int width, int height,
                double speckle, const std::string& out)
{
    PhantomSpec spec;
    if (!spec_path.empty())
        spec = phantom_spec_from_json(io::read_json_file(spec_path));
    else if (preset == "macular")
        spec = macular_phantom_spec(width, height, seed, speckle);
    else
        spec = peripapillary_phantom_spec(width, height, seed, speckle);
    const auto ph = generate(spec);
    Volume v;
    v.id = spec_path.empty() ? preset + "-" + std::to_string(seed) : fs::path(spec_path).stem().string();
    v.scan_kind = preset == "peripapillary" && spec_path.empty() ? ScanKind::Circumpapillary : ScanKind::Macular;
    v.bscans.push_back(ph.bscan);
    const auto manifest = io::save_portable(v, out);
    io::write_text_file(fs::path(out) / "truth.json", to_json(ph.truth).dump(2) + "\n");
    std::printf("%s (%dx%d) -> %s\n", v.id.c_str(), spec.width, spec.height, manifest.string().c_str());
    return 0;
}

int run_serve(const std::string& bind, const PipelineConfig& config)
{
    Service service(parse_bind(bind), [config] { return ProtocolHandler(config); });
    std::printf("listening on %s port %u\n", bind.c_str(), static_cast<unsigned>(service.port()));
    std::fflush(stdout);
    service.run();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Semi-automatic OCT retinal layer and fluid segmentation"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Pipeline config JSON (falls back to $LIVEWIRE_OCT_CONFIG)");

    std::string input, out, clicks, a_path, b_path, spec_path, preset = "macular", bind = "127.0.0.1:7878";
    std::vector<std::string> graders;
    std::uint64_t seed = 1;
    int width = 512, height = 496;
    double speckle = 0.15;

    auto* convert = app.add_subcommand("convert", "Convert a .vol file or manifest into a portable volume");
    convert->add_option("input", input, "Input .vol or manifest.json")->required();
    convert->add_option("--out", out, "Output directory")->required();

    auto* grid = app.add_subcommand("segment-grid", "Grid-based segmentation from a clicks file");
    grid->add_option("volume", input, "Volume (.vol or manifest.json)")->required();
    grid->add_option("clicks", clicks, "Clicks JSON")->required();
    grid->add_option("--out", out, "Output directory")->required();

    auto* eval = app.add_subcommand("evaluate", "Compare two record sets");
    eval->add_option("records_a", a_path, "Reference records (file or directory)")->required();
    eval->add_option("records_b", b_path, "Compared records (file or directory)");
    eval->add_option("--gold-from", graders, "Build the compared set as the mean of these graders' records");
    eval->add_option("--out", out, "Output directory")->required();

    auto* phantom = app.add_subcommand("phantom", "Generate a synthetic B-scan with ground truth");
    phantom->add_option("--spec", spec_path, "PhantomSpec JSON");
    phantom->add_option("--preset", preset, "Built-in spec")->check(CLI::IsMember({"macular", "peripapillary"}));
    phantom->add_option("--seed", seed, "Random seed");
    phantom->add_option("--width", width, "Columns")->check(CLI::Range(2, 1 << 14));
    phantom->add_option("--height", height, "Rows")->check(CLI::Range(2, 1 << 14));
    phantom->add_option("--speckle", speckle, "Speckle sigma")->check(CLI::NonNegativeNumber);
    phantom->add_option("--out", out, "Output directory")->required();

    auto* serve = app.add_subcommand("serve", "Run the line-delimited JSON session service");
    serve->add_option("--bind", bind, "host:port to listen on");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    if (*eval && b_path.empty() == graders.empty()) {
        std::fprintf(stderr, "evaluate: give either records_b or --gold-from, not both\n");
        return kExitUsage;
    }

    try {
        const auto config = resolve_config(config_path);
        if (*convert)
            return run_convert(input, out);
        if (*grid)
            return run_segment_grid(input, clicks, out);
        if (*eval)
            return run_evaluate(a_path, b_path, graders, out);
        if (*phantom)
            return run_phantom(spec_path, preset, seed, width, height, speckle, out);
        if (*serve)
            return run_serve(bind, config);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitData;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: malformed input: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
