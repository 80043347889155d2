#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "moseg/model.hpp"
#include "moseg/twoview.hpp"

namespace moseg::io {

/// Line-oriented input violation: carries the file, 1-based line, and the
/// violated rule.
class ParseError : public std::runtime_error {
public:
    ParseError(std::filesystem::path file, int line, std::string rule);

    const std::filesystem::path& file() const { return file_; }
    int line() const { return line_; }
    const std::string& rule() const { return rule_; }

private:
    std::filesystem::path file_;
    int line_ = 0;
    std::string rule_;
};

/// `pair_<i>_<j>.matches`: header `m <i> <j> <count>`, then one entry per
/// line: `idx_i idx_j [x y x' y']`. Coordinates are all-or-nothing.
struct MatchesFile {
    MatchList matches;
    std::optional<std::vector<Correspondence>> coordinates;
};

MatchesFile read_matches(const std::filesystem::path& path);
void write_matches(const std::filesystem::path& path, const MatchList& matches,
                   const std::vector<Correspondence>* coordinates = nullptr);

/// `pair_<i>_<j>.pseg`: header `s <i> <j> <count> <d>`, one label per line.
struct PsegFile {
    PartialSegmentation segmentation;
    int d = 0;
};

PsegFile read_pseg(const std::filesystem::path& path);
void write_pseg(const std::filesystem::path& path, const PartialSegmentation& segmentation,
                int d);

/// `image_<i>.tseg`: header `t <i> <p_i> <d>`, one label per line.
struct TsegFile {
    TotalSegmentation segmentation;
    int d = 0;
};

TsegFile read_tseg(const std::filesystem::path& path);
void write_tseg(const std::filesystem::path& path, const TotalSegmentation& segmentation, int d);

/// Optional `points.txt` sidecar fixing the per-image point counts (one
/// `<image> <count>` pair per line); without it counts are inferred from the
/// largest matched index.
std::map<int, int> read_points(const std::filesystem::path& path);
void write_points(const std::filesystem::path& path, const std::vector<int>& counts);

std::filesystem::path matches_name(ImagePair pair);
std::filesystem::path pseg_name(ImagePair pair);
std::filesystem::path tseg_name(int image);

/// All `pair_*_*.matches` (resp. `.pseg`, `image_*.tseg`) files in a
/// directory, sorted by the indices embedded in the name.
std::vector<std::filesystem::path> list_matches_files(const std::filesystem::path& dir);
std::vector<std::filesystem::path> list_pseg_files(const std::filesystem::path& dir);
std::vector<std::filesystem::path> list_tseg_files(const std::filesystem::path& dir);

/// Assembles a dataset from a directory containing matches + pseg files (and
/// optionally points.txt). Pairs lacking either file are skipped and
/// reported through `warnings` when given.
struct LoadedDataset {
    Dataset dataset;
    std::vector<std::vector<Correspondence>> coordinates;  // parallel to dataset.matches
    bool counts_inferred = false;
};

LoadedDataset load_dataset(const std::filesystem::path& dir,
                           std::vector<std::string>* warnings = nullptr);

}  // namespace moseg::io
