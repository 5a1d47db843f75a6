#include "vprmon/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vprmon/binary_io.hpp"
#include "vprmon/errors.hpp"

namespace vprmon {
namespace {

constexpr char kFeatureMagic[4] = {'V', 'P', 'R', 'F'};
constexpr std::uint32_t kFeatureVersion = 1;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const char* what, std::size_t row) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw LoadError(std::string("bad ") + what + " value '" + s + "' at row " +
                        std::to_string(row));
    }
    return v;
}

struct PoseTable {
    std::vector<Pose2D> poses;
    std::vector<double> odom;  // empty when the column was absent
    double rate_hint_hz = 0.0;
};

PoseTable read_poses_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());

    PoseTable table;
    std::string line;
    bool header_seen = false;
    bool has_odom = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string key;
            meta >> key;
            if (key == "rate_hint_hz") meta >> table.rate_hint_hz;
            continue;
        }
        if (!header_seen) {
            const auto cols = split_csv(line);
            if (cols.size() == 5 && cols[4] == "odom") {
                has_odom = true;
            } else if (cols.size() != 4) {
                throw LoadError("malformed header in " + file.string() +
                                ": expected index,x,y,theta[,odom]");
            }
            if (cols[0] != "index" || cols[1] != "x" || cols[2] != "y" || cols[3] != "theta") {
                throw LoadError("malformed header in " + file.string() +
                                ": expected index,x,y,theta[,odom]");
            }
            header_seen = true;
            continue;
        }
        ++row;
        const auto fields = split_csv(line);
        if (fields.size() != (has_odom ? 5U : 4U)) {
            throw LoadError("wrong column count at row " + std::to_string(row) + " in " +
                            file.string());
        }
        const double x = parse_double(fields[1], "x", row);
        const double y = parse_double(fields[2], "y", row);
        const double theta = parse_double(fields[3], "theta", row);
        table.poses.push_back(make_pose(x, y, theta));
        if (has_odom) table.odom.push_back(parse_double(fields[4], "odom", row));
    }
    if (!header_seen) throw LoadError("empty poses file: " + file.string());
    return table;
}

void write_poses_csv(const std::filesystem::path& file, const std::vector<Pose2D>& poses,
                     const std::vector<double>& odom, double rate_hint_hz) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    if (rate_hint_hz > 0.0) out << "# rate_hint_hz " << format_double(rate_hint_hz) << "\n";
    out << "index,x,y,theta,odom\n";
    for (std::size_t i = 0; i < poses.size(); ++i) {
        out << (i + 1) << ',' << format_double(poses[i].x) << ',' << format_double(poses[i].y)
            << ',' << format_double(poses[i].theta) << ',' << format_double(odom[i]) << "\n";
    }
    if (!out) throw IoError("write failed on " + file.string());
}

FeatureMatrix load_features(const std::filesystem::path& dir, FeatureFormat format) {
    const auto bin = dir / "features.bin";
    const auto csv = dir / "features.csv";
    switch (format) {
        case FeatureFormat::Binary:
            return read_features_bin(bin);
        case FeatureFormat::Csv:
            return read_features_csv(csv);
        case FeatureFormat::Auto:
            if (std::filesystem::exists(bin)) return read_features_bin(bin);
            if (std::filesystem::exists(csv)) return read_features_csv(csv);
            throw IoError("no features.bin or features.csv in " + dir.string());
    }
    throw ConfigError("invalid feature format");
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

FeatureMatrix read_features_bin(const std::filesystem::path& file) {
    BinaryReader in(file);
    char magic[4];
    in.bytes(magic, 4);
    if (std::memcmp(magic, kFeatureMagic, 4) != 0) {
        throw LoadError("bad magic in " + file.string());
    }
    const std::uint32_t version = in.u32();
    if (version != kFeatureVersion) {
        throw LoadError("unsupported feature file version " + std::to_string(version) +
                        " in " + file.string());
    }
    const std::uint32_t n = in.u32();
    const std::uint32_t m = in.u32();
    if (m == 0) throw LoadError("zero feature dimension in " + file.string());
    if (in.remaining() != static_cast<std::size_t>(n) * m * 4) {
        throw LoadError("feature payload size mismatch in " + file.string() + ": expected " +
                        std::to_string(static_cast<std::size_t>(n) * m * 4) + " bytes, found " +
                        std::to_string(in.remaining()));
    }
    FeatureMatrix mat(n, m);
    mat.data() = in.f32_array(static_cast<std::size_t>(n) * m);
    return mat;
}

void write_features_bin(const FeatureMatrix& m, const std::filesystem::path& file) {
    BinaryWriter out(file);
    out.bytes(kFeatureMagic, 4);
    out.u32(kFeatureVersion);
    out.u32(static_cast<std::uint32_t>(m.rows()));
    out.u32(static_cast<std::uint32_t>(m.dim()));
    out.f32_array(m.data());
    // no CRC trailer; the payload size is fully determined by the header
}

FeatureMatrix read_features_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<std::vector<float>> rows;
    std::size_t dim = 0;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++row;
        const auto fields = split_csv(line);
        std::vector<float> values;
        values.reserve(fields.size());
        for (const auto& f : fields) {
            values.push_back(static_cast<float>(parse_double(f, "feature", row)));
        }
        if (row == 1) {
            dim = values.size();
        } else if (values.size() != dim) {
            throw LoadError("feature dimension mismatch at row " + std::to_string(row) +
                            ": expected " + std::to_string(dim) + ", found " +
                            std::to_string(values.size()));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw LoadError("empty feature file: " + file.string());
    FeatureMatrix mat(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].begin(), rows[i].end(), mat.row(i).begin());
    }
    return mat;
}

Traverse load_traverse(const std::filesystem::path& dir, FeatureFormat format) {
    auto table = read_poses_csv(dir / "poses.csv");
    Traverse t;
    t.poses = std::move(table.poses);
    t.odom = table.odom.empty() ? derive_odom(t.poses) : std::move(table.odom);
    t.features = load_features(dir, format);
    t.label = dir.filename().string();
    validate_traverse(t);
    return t;
}

QueryStream load_query_stream(const std::filesystem::path& dir, FeatureFormat format) {
    auto table = read_poses_csv(dir / "poses.csv");
    QueryStream q;
    q.ground_truth = std::move(table.poses);
    q.odometer = table.odom.empty() ? derive_odom(q.ground_truth) : std::move(table.odom);
    q.features = load_features(dir, format);
    q.rate_hint_hz = table.rate_hint_hz;
    validate_query_stream(q, 0);
    return q;
}

void save_traverse(const Traverse& t, const std::filesystem::path& dir) {
    validate_traverse(t);
    std::filesystem::create_directories(dir);
    write_poses_csv(dir / "poses.csv", t.poses, t.odom, 0.0);
    write_features_bin(t.features, dir / "features.bin");
}

void save_query_stream(const QueryStream& q, const std::filesystem::path& dir) {
    validate_query_stream(q, 0);
    std::filesystem::create_directories(dir);
    write_poses_csv(dir / "poses.csv", q.ground_truth, q.odometer, q.rate_hint_hz);
    write_features_bin(q.features, dir / "features.bin");
}

void save_provenance(const std::vector<ProvenanceRecord>& records,
                     const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << "query,true_ref,aliased,source_ref,condition,blend\n";
    for (const auto& r : records) {
        out << r.query_index << ',' << r.true_ref << ',' << (r.aliased ? 1 : 0) << ','
            << r.source_ref << ',' << format_double(r.condition) << ','
            << format_double(r.blend) << "\n";
    }
    if (!out) throw IoError("write failed on " + file.string());
}

std::vector<ProvenanceRecord> load_provenance(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<ProvenanceRecord> records;
    std::string line;
    bool header_seen = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        ++row;
        const auto f = split_csv(line);
        if (f.size() != 6) {
            throw LoadError("wrong column count at row " + std::to_string(row) + " in " +
                            file.string());
        }
        ProvenanceRecord r;
        r.query_index = static_cast<std::size_t>(parse_double(f[0], "query", row));
        r.true_ref = static_cast<std::size_t>(parse_double(f[1], "true_ref", row));
        r.aliased = parse_double(f[2], "aliased", row) != 0.0;
        r.source_ref = static_cast<std::size_t>(parse_double(f[3], "source_ref", row));
        r.condition = parse_double(f[4], "condition", row);
        r.blend = parse_double(f[5], "blend", row);
        records.push_back(r);
    }
    return records;
}

}  // namespace vprmon
