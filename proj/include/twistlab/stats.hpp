#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistlab/maps.hpp"

namespace twistlab {

struct Box {
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
    bool valid() const { return x0 < x1 && y0 < y1; }
};

enum class ScanMode { Grid, MonteCarlo };

struct ScanConfig {
    Box box;
    ScanMode mode = ScanMode::Grid;
    std::size_t grid_x = 16;  // Grid: cell centres
    std::size_t grid_y = 16;
    std::size_t samples = 1000;  // MonteCarlo
    std::uint64_t seed = 0;
    long horizon = 2000;
    double eps = 0.05;  // |torsion| > eps counts as non-zero
    long period = 1;    // period M of the region under study; metadata only
    unsigned threads = 0;  // 0: hardware concurrency, 1: serial

    std::size_t sample_count() const { return mode == ScanMode::Grid ? grid_x * grid_y : samples; }
    void validate() const;
};

struct ScanRecord {
    Point point;
    double torsion = 0.0;  // Torsion_N for the vertical start
    std::optional<long> overconjugate_time;
    double rotation = 0.0;
    std::string error;  // empty unless the sample failed

    bool ok() const { return error.empty(); }
};

struct MeasureEstimate {
    std::size_t count = 0;             // records without error
    double fraction_negative = 0.0;    // torsion < -eps
    double fraction_nonzero = 0.0;     // |torsion| > eps
    double mean_torsion = 0.0;
    double stderr_negative = 0.0;      // sample standard error of the negative indicator
    double stderr_torsion = 0.0;       // sample standard error of the torsion mean

    friend bool operator==(const MeasureEstimate&, const MeasureEstimate&) = default;
};

struct ScanResult {
    ScanConfig config;
    std::string map_spec;
    std::vector<ScanRecord> records;
    MeasureEstimate summary;
};

/// Counter-based generator: sample i of a seeded scan draws its two uniforms
/// from SplitMix64 applied to (seed, 2i) and (seed, 2i + 1), so any thread
/// partition produces the same points.
double uniform01(std::uint64_t seed, std::uint64_t counter);

/// Sample points of a scan in index order (grid: row-major, x fastest).
std::vector<Point> scan_points(const ScanConfig& cfg);

/// Reduction over records in index order (Neumaier-compensated sums).
MeasureEstimate summarize(const std::vector<ScanRecord>& records, double eps);

ScanResult torsion_field(const LiftedMap& map, const ScanConfig& cfg);

/// Monte-Carlo estimate of the non-zero-torsion fraction of the box.
MeasureEstimate island_measure(const LiftedMap& map, const ScanConfig& cfg);

struct IntegralEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Box area times the mean finite-time torsion over Monte-Carlo samples.
IntegralEstimate torsion_integral(const LiftedMap& map, const ScanConfig& cfg);
IntegralEstimate torsion_integral(const ScanResult& result);

struct FirstReturnReport {
    std::vector<long> return_times;  // tau_1..tau_R, in steps of g = f^M
    std::vector<double> phi;         // angle sum over each return excursion
    long total_time = 0;             // N_R = sum of tau
    long cap = 0;
    bool complete = false;           // R returns were found within the cap
    double ratio = 0.0;              // sum(phi) / sum(tau)
    double direct = 0.0;             // Torsion_{N_R}(g) from an independent trace
    double discrepancy = 0.0;        // |ratio - direct|
    bool identity_holds = false;     // discrepancy <= 1e-12 * N_R
};

/// First-return decomposition of the vertical angle cocycle of g = f^period
/// on the window W (x taken mod 1). Throws Error when the orbit never
/// returns within the cap.
FirstReturnReport first_return_torsion(const LiftedMap& map, const Box& window, Point p, long returns, long cap,
                                       long period = 1);

/// CSV: `#` key=value metadata and summary, then `x,y,torsion,overconj_time,rotation`.
std::string scan_to_csv(const ScanResult& result);

struct ParsedScan {
    std::vector<ScanRecord> records;
    std::vector<std::pair<std::string, std::string>> metadata;  // in file order
    double eps = 0.0;
    std::optional<std::string> find(const std::string& key) const;
};

ParsedScan parse_scan_csv(const std::string& text);

struct HeatmapOptions {
    std::optional<double> scale;  // symmetric bound; default max |torsion|
    int cell_px = 12;
};

/// Self-contained SVG of a grid scan: one rect per cell, diverging colour
/// scale symmetric about zero, legend with the data min/max.
std::string render_heatmap(const ScanResult& field, const HeatmapOptions& opts = {});

}  // namespace twistlab
