// Walks through one grading session on a synthetic macular B-scan: livewire for the ILM,
// grid clicks for the IPL/INL interface, a splice correction, and one fluid contour.
//
//   sample_segment [out_dir] [seed]

#include "lwoct/annotate.hpp"
#include "lwoct/io/record.hpp"
#include "lwoct/metrics.hpp"
#include "lwoct/phantom.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

using namespace lwoct;

int main(int argc, char** argv)
{
    const std::string out = argc > 1 ? argv[1] : "sample_out";
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;

    auto spec = macular_phantom_spec(512, 496, seed);
    const double blob_y = spec.layers[1].curve[256] + 40.0;
    spec.blobs.push_back({256.0, blob_y, 40.0, 18.0, 0.02});
    const auto ph = generate(spec);
    const auto& ilm = ph.truth.boundaries.at(BoundaryId::ILM);
    const auto& ipl = ph.truth.boundaries.at(BoundaryId::IPL_INL);

    double now = 0.0;
    Session session(ph.bscan, "phantom-" + std::to_string(seed), ScanKind::Macular, PipelineConfig::defaults(),
                    "sample", [&now] { return now; });

    session.set_mode({SessionModeKind::LayerLivewire, BoundaryId::ILM, FluidLabel::Unlabeled});
    for (int x = 0; x < 512; x += 100) {
        now += 1.5;
        session.add_anchor(x, ilm[static_cast<std::size_t>(x)]);
    }
    now += 1.0;
    session.commit();

    session.set_mode({SessionModeKind::Grid, BoundaryId::IPL_INL, FluidLabel::Unlabeled});
    for (int k = 0; k <= 10; ++k) {
        const int x = k * 511 / 10;
        now += 0.8;
        session.add_anchor(x, ipl[static_cast<std::size_t>(x)]);
    }
    session.commit();

    // Pretend the grader disagrees with columns 140..180 and re-traces them.
    session.splice(BoundaryId::ILM, {140, ilm[140], now}, {180, ilm[180], now});

    session.set_mode({SessionModeKind::Fluid, BoundaryId::ILM, FluidLabel::IRF});
    session.add_anchor(216, blob_y);
    session.add_anchor(256, blob_y - 18.0);
    session.add_anchor(296, blob_y);
    session.add_anchor(256, blob_y + 18.0);
    session.commit();
    session.filter_fluids();

    const auto& record = session.record();
    for (const auto& [id, b] : record.boundaries)
        std::printf("%-8s %-9s clicks %2d  unsigned error vs truth %.3f px\n", std::string(to_string(id)).c_str(),
                    std::string(to_string(b.mode)).c_str(), b.click_count,
                    unsigned_error(b.y, ph.truth.boundaries.at(id)));
    for (const auto& f : record.fluids)
        std::printf("fluid %s area %d px, dice vs truth %.3f\n", std::string(to_string(f.label)).c_str(), f.area_px,
                    dice(f.mask, ph.truth.fluid_masks.front()));

    const auto files = io::export_record(record, session.bscan(), out);
    std::printf("wrote %s and %s\n", files.json.string().c_str(), files.overlay.string().c_str());
    return 0;
}
