#include "moseg/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace moseg::io {

namespace fs = std::filesystem;

ParseError::ParseError(fs::path file, int line, std::string rule)
    : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + rule),
      file_(std::move(file)),
      line_(line),
      rule_(std::move(rule)) {}

namespace {

/// Token-line reader skipping blank lines and '#' comments.
class LineReader {
public:
    LineReader(const fs::path& path) : path_(path), in_(path) {
        if (!in_) throw ParseError(path, 0, "cannot open file");
    }

    /// Next content line split into whitespace tokens; empty at EOF.
    std::vector<std::string> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream stream(line);
            std::vector<std::string> tokens;
            std::string token;
            while (stream >> token) tokens.push_back(std::move(token));
            if (!tokens.empty()) return tokens;
        }
        return {};
    }

    int line() const { return line_; }
    const fs::path& path() const { return path_; }

    [[noreturn]] void fail(const std::string& rule) const { throw ParseError(path_, line_, rule); }

private:
    fs::path path_;
    std::ifstream in_;
    int line_ = 0;
};

long parse_int(const LineReader& reader, const std::string& token, const char* what) {
    long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        reader.fail(std::string("expected integer ") + what + ", got '" + token + "'");
    return value;
}

double parse_double(const LineReader& reader, const std::string& token, const char* what) {
    try {
        std::size_t used = 0;
        const double value = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        reader.fail(std::string("expected number ") + what + ", got '" + token + "'");
    }
}

/// Writes via a temp file and renames, so readers never see partial files.
class AtomicWriter {
public:
    explicit AtomicWriter(const fs::path& path) : path_(path), tmp_(path.string() + ".tmp"), out_(tmp_) {
        if (!out_) throw std::runtime_error("cannot open " + tmp_.string());
    }

    std::ofstream& stream() { return out_; }

    void commit() {
        out_.close();
        if (!out_) throw std::runtime_error("write failed: " + tmp_.string());
        fs::rename(tmp_, path_);
    }

private:
    fs::path path_;
    fs::path tmp_;
    std::ofstream out_;
};

std::optional<ImagePair> parse_pair_name(const std::string& stem) {
    // pair_<i>_<j>
    if (stem.rfind("pair_", 0) != 0) return std::nullopt;
    const auto rest = stem.substr(5);
    const auto sep = rest.find('_');
    if (sep == std::string::npos) return std::nullopt;
    try {
        const int i = std::stoi(rest.substr(0, sep));
        const int j = std::stoi(rest.substr(sep + 1));
        return ImagePair{i, j};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<int> parse_image_name(const std::string& stem) {
    if (stem.rfind("image_", 0) != 0) return std::nullopt;
    try {
        return std::stoi(stem.substr(6));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<fs::path> list_by_extension(const fs::path& dir, const std::string& ext, bool pairs) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ext) continue;
        const std::string stem = entry.path().stem().string();
        if (pairs ? parse_pair_name(stem).has_value() : parse_image_name(stem).has_value())
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [&](const fs::path& a, const fs::path& b) {
        if (pairs)
            return *parse_pair_name(a.stem().string()) < *parse_pair_name(b.stem().string());
        return *parse_image_name(a.stem().string()) < *parse_image_name(b.stem().string());
    });
    return files;
}

}  // namespace

MatchesFile read_matches(const fs::path& path) {
    LineReader reader(path);
    const auto header = reader.next();
    if (header.size() != 4 || header[0] != "m")
        reader.fail("expected header 'm <i> <j> <count>'");
    MatchesFile file;
    file.matches.pair.i = static_cast<int>(parse_int(reader, header[1], "i"));
    file.matches.pair.j = static_cast<int>(parse_int(reader, header[2], "j"));
    const long count = parse_int(reader, header[3], "count");
    if (file.matches.pair.i < 0 || file.matches.pair.j <= file.matches.pair.i)
        reader.fail("pair must satisfy 0 <= i < j");
    if (count < 0) reader.fail("negative match count");

    for (long t = 0; t < count; ++t) {
        const auto tokens = reader.next();
        if (tokens.empty()) reader.fail("expected " + std::to_string(count) + " match entries");
        if (tokens.size() != 2 && tokens.size() != 6)
            reader.fail("expected 'idx_i idx_j' or 'idx_i idx_j x y x\\' y\\''");
        const int a = static_cast<int>(parse_int(reader, tokens[0], "idx_i"));
        const int b = static_cast<int>(parse_int(reader, tokens[1], "idx_j"));
        if (a < 0 || b < 0) reader.fail("negative point index");
        file.matches.entries.emplace_back(a, b);
        if (tokens.size() == 6) {
            if (!file.coordinates) {
                if (t != 0) reader.fail("coordinates must be present on all entries or none");
                file.coordinates.emplace();
            }
            file.coordinates->push_back({parse_double(reader, tokens[2], "x"),
                                         parse_double(reader, tokens[3], "y"),
                                         parse_double(reader, tokens[4], "x'"),
                                         parse_double(reader, tokens[5], "y'")});
        } else if (file.coordinates) {
            reader.fail("coordinates must be present on all entries or none");
        }
    }
    if (!reader.next().empty()) reader.fail("trailing content after " + std::to_string(count) +
                                            " match entries");
    return file;
}

void write_matches(const fs::path& path, const MatchList& matches,
                   const std::vector<Correspondence>* coordinates) {
    AtomicWriter writer(path);
    auto& out = writer.stream();
    out << "m " << matches.pair.i << ' ' << matches.pair.j << ' ' << matches.entries.size()
        << '\n';
    out.precision(17);
    for (std::size_t t = 0; t < matches.entries.size(); ++t) {
        out << matches.entries[t].first << ' ' << matches.entries[t].second;
        if (coordinates) {
            const Correspondence& c = (*coordinates)[t];
            out << ' ' << c.x << ' ' << c.y << ' ' << c.xp << ' ' << c.yp;
        }
        out << '\n';
    }
    writer.commit();
}

PsegFile read_pseg(const fs::path& path) {
    LineReader reader(path);
    const auto header = reader.next();
    if (header.size() != 5 || header[0] != "s")
        reader.fail("expected header 's <i> <j> <count> <d>'");
    PsegFile file;
    file.segmentation.pair.i = static_cast<int>(parse_int(reader, header[1], "i"));
    file.segmentation.pair.j = static_cast<int>(parse_int(reader, header[2], "j"));
    const long count = parse_int(reader, header[3], "count");
    file.d = static_cast<int>(parse_int(reader, header[4], "d"));
    if (file.segmentation.pair.i < 0 || file.segmentation.pair.j <= file.segmentation.pair.i)
        reader.fail("pair must satisfy 0 <= i < j");
    if (count < 0 || file.d < 1) reader.fail("bad count or motion count");

    for (long t = 0; t < count; ++t) {
        const auto tokens = reader.next();
        if (tokens.empty()) reader.fail("expected " + std::to_string(count) + " labels");
        if (tokens.size() != 1) reader.fail("expected one label per line");
        const long label = parse_int(reader, tokens[0], "label");
        if (label < 0 || label > file.d)
            reader.fail("label " + std::to_string(label) + " outside {0.." +
                        std::to_string(file.d) + "}");
        file.segmentation.labels.push_back(static_cast<Label>(label));
    }
    if (!reader.next().empty()) reader.fail("trailing content after labels");
    return file;
}

void write_pseg(const fs::path& path, const PartialSegmentation& segmentation, int d) {
    AtomicWriter writer(path);
    auto& out = writer.stream();
    out << "s " << segmentation.pair.i << ' ' << segmentation.pair.j << ' '
        << segmentation.labels.size() << ' ' << d << '\n';
    for (Label l : segmentation.labels) out << static_cast<int>(l) << '\n';
    writer.commit();
}

TsegFile read_tseg(const fs::path& path) {
    LineReader reader(path);
    const auto header = reader.next();
    if (header.size() != 4 || header[0] != "t") reader.fail("expected header 't <i> <p_i> <d>'");
    TsegFile file;
    file.segmentation.image = static_cast<int>(parse_int(reader, header[1], "i"));
    const long count = parse_int(reader, header[2], "p_i");
    file.d = static_cast<int>(parse_int(reader, header[3], "d"));
    if (file.segmentation.image < 0 || count < 0 || file.d < 1)
        reader.fail("bad image index, point count, or motion count");

    for (long t = 0; t < count; ++t) {
        const auto tokens = reader.next();
        if (tokens.empty()) reader.fail("expected " + std::to_string(count) + " labels");
        if (tokens.size() != 1) reader.fail("expected one label per line");
        const long label = parse_int(reader, tokens[0], "label");
        if (label < 0 || label > file.d)
            reader.fail("label " + std::to_string(label) + " outside {0.." +
                        std::to_string(file.d) + "}");
        file.segmentation.labels.push_back(static_cast<Label>(label));
    }
    if (!reader.next().empty()) reader.fail("trailing content after labels");
    return file;
}

void write_tseg(const fs::path& path, const TotalSegmentation& segmentation, int d) {
    AtomicWriter writer(path);
    auto& out = writer.stream();
    out << "t " << segmentation.image << ' ' << segmentation.labels.size() << ' ' << d << '\n';
    for (Label l : segmentation.labels) out << static_cast<int>(l) << '\n';
    writer.commit();
}

std::map<int, int> read_points(const fs::path& path) {
    LineReader reader(path);
    std::map<int, int> counts;
    for (auto tokens = reader.next(); !tokens.empty(); tokens = reader.next()) {
        if (tokens.size() != 2) reader.fail("expected '<image> <count>' per line");
        const int image = static_cast<int>(parse_int(reader, tokens[0], "image"));
        const int count = static_cast<int>(parse_int(reader, tokens[1], "count"));
        if (image < 0 || count < 0) reader.fail("negative image index or count");
        if (!counts.emplace(image, count).second)
            reader.fail("duplicate image " + std::to_string(image));
    }
    return counts;
}

void write_points(const fs::path& path, const std::vector<int>& counts) {
    AtomicWriter writer(path);
    auto& out = writer.stream();
    out << "# points per image\n";
    for (std::size_t i = 0; i < counts.size(); ++i) out << i << ' ' << counts[i] << '\n';
    writer.commit();
}

fs::path matches_name(ImagePair pair) {
    return "pair_" + std::to_string(pair.i) + "_" + std::to_string(pair.j) + ".matches";
}

fs::path pseg_name(ImagePair pair) {
    return "pair_" + std::to_string(pair.i) + "_" + std::to_string(pair.j) + ".pseg";
}

fs::path tseg_name(int image) { return "image_" + std::to_string(image) + ".tseg"; }

std::vector<fs::path> list_matches_files(const fs::path& dir) {
    return list_by_extension(dir, ".matches", true);
}

std::vector<fs::path> list_pseg_files(const fs::path& dir) {
    return list_by_extension(dir, ".pseg", true);
}

std::vector<fs::path> list_tseg_files(const fs::path& dir) {
    return list_by_extension(dir, ".tseg", false);
}

LoadedDataset load_dataset(const fs::path& dir, std::vector<std::string>* warnings) {
    LoadedDataset loaded;
    auto warn = [&](std::string msg) {
        if (warnings) warnings->push_back(std::move(msg));
    };

    std::vector<PsegFile> psegs;
    for (const auto& path : list_pseg_files(dir)) psegs.push_back(read_pseg(path));

    int d = 0;
    int max_image = -1;
    for (const auto& pseg : psegs) {
        if (d == 0) d = pseg.d;
        if (pseg.d != d)
            throw std::runtime_error("inconsistent motion counts across .pseg files in " +
                                     dir.string());
        max_image = std::max({max_image, pseg.segmentation.pair.i, pseg.segmentation.pair.j});
    }

    for (const auto& path : list_matches_files(dir)) {
        const ImagePair pair = *parse_pair_name(path.stem().string());
        const bool segmented = std::any_of(psegs.begin(), psegs.end(), [&](const PsegFile& p) {
            return p.segmentation.pair == pair;
        });
        if (!segmented) {
            warn("no .pseg for " + path.filename().string() + "; pair skipped");
            continue;
        }
        MatchesFile file = read_matches(path);
        if (file.matches.pair != pair)
            throw ParseError(path, 1, "header pair does not match file name");
        if (file.coordinates)
            loaded.coordinates.push_back(std::move(*file.coordinates));
        else
            loaded.coordinates.emplace_back();
        loaded.dataset.matches.push_back(std::move(file.matches));
    }
    for (auto& pseg : psegs) {
        const ImagePair pair = pseg.segmentation.pair;
        if (loaded.dataset.find_matches(pair) == nullptr)
            throw std::runtime_error("missing " + matches_name(pair).string() + " in " +
                                     dir.string());
        loaded.dataset.partials.push_back(std::move(pseg.segmentation));
    }

    for (const auto& m : loaded.dataset.matches)
        max_image = std::max({max_image, m.pair.i, m.pair.j});
    loaded.dataset.d = d;
    loaded.dataset.n = max_image + 1;

    const fs::path points_path = dir / "points.txt";
    if (fs::exists(points_path)) {
        const auto counts = read_points(points_path);
        if (!counts.empty()) loaded.dataset.n = std::max(loaded.dataset.n, counts.rbegin()->first + 1);
        loaded.dataset.p.assign(loaded.dataset.n, 0);
        for (int i = 0; i < loaded.dataset.n; ++i) {
            const auto it = counts.find(i);
            if (it == counts.end())
                throw ParseError(points_path, 0,
                                 "missing point count for image " + std::to_string(i));
            loaded.dataset.p[i] = it->second;
        }
    } else {
        loaded.counts_inferred = true;
        warn("points.txt not found; point counts inferred from match indices");
        loaded.dataset.p.assign(loaded.dataset.n, 0);
        for (const auto& m : loaded.dataset.matches) {
            for (const auto& [a, b] : m.entries) {
                loaded.dataset.p[m.pair.i] = std::max(loaded.dataset.p[m.pair.i], a + 1);
                loaded.dataset.p[m.pair.j] = std::max(loaded.dataset.p[m.pair.j], b + 1);
            }
        }
    }
    return loaded;
}

}  // namespace moseg::io
