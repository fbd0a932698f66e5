#pragma once

#include <string>

#include "oaf/clustering.hpp"
#include "oaf/metrics.hpp"
#include "oaf/simplex.hpp"
#include "oaf/volume.hpp"

namespace oaf {

// On-disk containers: every array lives as a JSON sidecar plus a raw
// little-endian binary blob next to it.  Functions take a base path; the
// type-specific suffixes (.vol.json/.vol.raw, .lbl.*, .dst.*, .dict.*) are
// appended, and a base that already carries its suffix is accepted too.

void save_volume(const std::string& base, const Volume& volume);
Volume load_volume(const std::string& base);

// converged records whether the producing flow hit its entropy target; it
// rides along so evaluation can report it.
void save_labels(const std::string& base, const LabeledVolume& labels,
                 bool converged);
LabeledVolume load_labels(const std::string& base, bool* converged = nullptr);

// n x c matrices (distances or raw class scores), f32 row-major.
void save_distances(const std::string& base, const Mat& matrix);
Mat load_distances(const std::string& base);

void save_dictionary(const std::string& base, const PrototypeDictionary& dict);
PrototypeDictionary load_dictionary(const std::string& base);

// Reports are single JSON documents at exactly the given path.
void save_report(const std::string& path, const MetricsReport& report);
MetricsReport load_report(const std::string& path);

}  // namespace oaf
