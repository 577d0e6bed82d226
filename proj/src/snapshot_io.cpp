#include "kvnsim/snapshot_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kvnsim {

namespace fs = std::filesystem;

namespace {

std::string_view dtype_name(DType d) { return d == DType::F64 ? "f64le" : "c128le"; }

std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("snapshot header: bad " + what + " '" + s + "'");
    return v;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("snapshot header: bad " + what + " '" + s + "'");
    return v;
}

void put_le(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>(bits & 0xffu));
        bits >>= 8;
    }
}

double get_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
    return std::bit_cast<double>(bits);
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string header_text(const SnapshotHeader& h) {
    std::ostringstream o;
    o << "name " << h.name << "\n";
    o << "dtype " << dtype_name(h.dtype) << "\n";
    o << "shape";
    for (auto n : h.shape) o << " " << n;
    o << "\naxes";
    for (const auto& a : h.axes) o << " " << a;
    o << "\nrepresentation " << h.representation << "\n";
    o << "endianness little\n";
    o << "time " << format_double(h.time) << "\n";
    for (const auto& [label, ax] : h.ranges)
        o << "range " << label << " " << ax.n << " " << format_double(ax.min) << " " << format_double(ax.max) << "\n";
    return o.str();
}

std::vector<fs::path> write_pair(const fs::path& dir, const SnapshotHeader& h, const std::string& bytes) {
    const fs::path bin = dir / (h.name + ".bin");
    const fs::path hdr = dir / (h.name + ".hdr");
    write_file(bin, bytes);
    write_file(hdr, header_text(h));
    return {bin, hdr};
}

std::pair<std::string, std::string> axis_labels(Rep rep) {
    return {first_axis_dual(rep) ? "lambda_q" : "q", second_axis_dual(rep) ? "lambda_p" : "p"};
}

}  // namespace

std::size_t SnapshotHeader::count() const {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

std::vector<fs::path> write_snapshot(const fs::path& dir, const SnapshotHeader& header, std::span<const cplx> values) {
    if (header.dtype != DType::C128 || values.size() != header.count())
        throw std::invalid_argument("write_snapshot: header does not describe a complex array of this size");
    std::string bytes;
    bytes.reserve(values.size() * 16);
    for (const auto& v : values) {
        put_le(bytes, v.real());
        put_le(bytes, v.imag());
    }
    return write_pair(dir, header, bytes);
}

std::vector<fs::path> write_snapshot(const fs::path& dir, const SnapshotHeader& header, std::span<const double> values) {
    if (header.dtype != DType::F64 || values.size() != header.count())
        throw std::invalid_argument("write_snapshot: header does not describe a real array of this size");
    std::string bytes;
    bytes.reserve(values.size() * 8);
    for (double v : values) put_le(bytes, v);
    return write_pair(dir, header, bytes);
}

SnapshotData read_snapshot(const fs::path& path) {
    fs::path base = path;
    if (base.extension() == ".hdr" || base.extension() == ".bin") base.replace_extension();
    const fs::path hdr = fs::path(base.string() + ".hdr");
    const fs::path bin = fs::path(base.string() + ".bin");

    std::ifstream in(hdr);
    if (!in) throw std::runtime_error("cannot read snapshot header '" + hdr.string() + "'");
    SnapshotData snap;
    auto& h = snap.header;
    bool have_dtype = false, have_shape = false, little = false;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::vector<std::string> words;
        for (std::string w; ls >> w;) words.push_back(w);
        if (key == "name" && words.size() == 1) {
            h.name = words[0];
        } else if (key == "dtype" && words.size() == 1) {
            if (words[0] == "f64le")
                h.dtype = DType::F64;
            else if (words[0] == "c128le")
                h.dtype = DType::C128;
            else
                throw std::runtime_error("snapshot header: unknown dtype '" + words[0] + "'");
            have_dtype = true;
        } else if (key == "shape") {
            for (const auto& w : words) h.shape.push_back(parse_size(w, "shape"));
            have_shape = !h.shape.empty();
        } else if (key == "axes") {
            h.axes = words;
        } else if (key == "representation" && words.size() == 1) {
            h.representation = words[0];
        } else if (key == "endianness" && words.size() == 1) {
            little = words[0] == "little";
        } else if (key == "time" && words.size() == 1) {
            h.time = parse_double(words[0], "time");
        } else if (key == "range" && words.size() == 4) {
            h.ranges.push_back({words[0], UniformAxis{parse_size(words[1], "range size"), parse_double(words[2], "range min"),
                                                      parse_double(words[3], "range max")}});
        } else {
            throw std::runtime_error("snapshot header: unexpected line '" + line + "'");
        }
    }
    if (!have_dtype || !have_shape || !little)
        throw std::runtime_error("snapshot header '" + hdr.string() + "' lacks dtype, shape or little endianness");

    std::ifstream data(bin, std::ios::binary);
    if (!data) throw std::runtime_error("cannot read snapshot data '" + bin.string() + "'");
    const std::string bytes((std::istreambuf_iterator<char>(data)), std::istreambuf_iterator<char>());
    const std::size_t width = h.dtype == DType::F64 ? 8 : 16;
    if (bytes.size() != h.count() * width)
        throw std::runtime_error("snapshot data '" + bin.string() + "' has " + std::to_string(bytes.size()) +
                                 " bytes, header implies " + std::to_string(h.count() * width));
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (h.dtype == DType::F64) {
        snap.real.resize(h.count());
        for (std::size_t k = 0; k < snap.real.size(); ++k) snap.real[k] = get_le(p + 8 * k);
    } else {
        snap.complex.resize(h.count());
        for (std::size_t k = 0; k < snap.complex.size(); ++k) snap.complex[k] = {get_le(p + 16 * k), get_le(p + 16 * k + 8)};
    }
    return snap;
}

SnapshotHeader header_for(const std::string& name, const KvnState& s, double time) {
    const auto [a, b] = axis_labels(s.rep());
    SnapshotHeader h;
    h.name = name;
    h.dtype = DType::C128;
    h.shape = {s.rows(), s.cols()};
    h.axes = {a, b};
    h.representation = std::string(to_string(s.rep()));
    h.time = time;
    h.ranges = {{"q", s.grid().q_axis()}, {"p", s.grid().p_axis()}};
    return h;
}

SnapshotHeader header_for_field(const std::string& name, const PhaseGrid& grid, double time) {
    SnapshotHeader h;
    h.name = name;
    h.dtype = DType::F64;
    h.shape = {grid.n_q(), grid.n_p()};
    h.axes = {"q", "p"};
    h.representation = "QP";
    h.time = time;
    h.ranges = {{"q", grid.q_axis()}, {"p", grid.p_axis()}};
    return h;
}

SnapshotHeader header_for(const std::string& name, const EmState& s, double time) {
    SnapshotHeader h;
    h.name = name;
    h.dtype = DType::C128;
    h.shape = {6, s.n_z()};
    h.axes = {"component", "z"};
    h.representation = "z";
    h.time = time;
    h.ranges = {{"z", UniformAxis{s.n_z(), 0.0, s.length()}}};
    return h;
}

PhaseGrid grid_from_snapshot(const SnapshotHeader& h) {
    const UniformAxis* q = nullptr;
    const UniformAxis* p = nullptr;
    for (const auto& [label, ax] : h.ranges) {
        if (label == "q") q = &ax;
        if (label == "p") p = &ax;
    }
    if (!q || !p || h.shape.size() != 2 || h.shape[0] != q->n || h.shape[1] != p->n)
        throw std::runtime_error("snapshot '" + h.name + "' does not describe a phase-space grid");
    return make_grid(q->n, p->n, {q->min, q->max}, {p->min, p->max});
}

KvnState state_from_snapshot(const SnapshotData& snap) {
    if (snap.header.dtype != DType::C128) throw std::runtime_error("snapshot '" + snap.header.name + "' is not complex");
    return KvnState(grid_from_snapshot(snap.header), rep_from_string(snap.header.representation), snap.complex);
}

EmState em_state_from_snapshot(const SnapshotData& snap) {
    const auto& h = snap.header;
    if (h.dtype != DType::C128 || h.representation != "z" || h.shape.size() != 2 || h.shape[0] != 6 ||
        h.ranges.size() != 1 || h.ranges[0].second.n != h.shape[1])
        throw std::runtime_error("snapshot '" + h.name + "' does not describe an EM spinor");
    EmState s(h.shape[1], h.ranges[0].second.max - h.ranges[0].second.min);
    for (std::size_t c = 0; c < 6; ++c)
        for (std::size_t k = 0; k < h.shape[1]; ++k) s.psi(c, k) = snap.complex[c * h.shape[1] + k];
    return s;
}

}  // namespace kvnsim
