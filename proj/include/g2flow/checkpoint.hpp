#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "g2flow/lattice.hpp"

namespace g2flow {

/// Checkpoint I/O failures carry a kind so callers can distinguish a
/// malformed header from a short payload or corrupt numbers.
struct CheckpointError : std::runtime_error {
    enum class Kind { Io, Header, PayloadSize, NonFinite };
    Kind kind;
    CheckpointError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

namespace detail {

inline double to_little_endian(double v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        std::uint64_t sw = 0;
        for (int i = 0; i < 8; ++i) sw = (sw << 8) | ((bits >> (8 * i)) & 0xff);
        std::memcpy(&v, &sw, sizeof(v));
        return v;
    }
}

inline double from_little_endian(double v) { return to_little_endian(v); }

}  // namespace detail

/// File layout: one JSON header line (lattice spec fields, time, step)
/// terminated by '\n', then the raw little-endian float64 payload, row-major
/// over the active axes with the 8 octonion components innermost.
inline void save_checkpoint(const std::string& path, const OctonionField& field, double time,
                            long step) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointError::Kind::Io, "cannot open for writing: " + path);

    nlohmann::json header = {
        {"active_axes", field.spec.active_axes()},
        {"n", field.spec.points_per_axis()},
        {"L", field.spec.length()},
        {"time", time},
        {"step", step},
        {"points", field.spec.point_count()},
    };
    out << header.dump() << '\n';

    std::vector<double> buffer(field.spec.point_count() * 8);
    std::size_t k = 0;
    for (const Octonion& o : field.values) {
        buffer[k++] = detail::to_little_endian(o.re);
        for (double x : o.im) buffer[k++] = detail::to_little_endian(x);
    }
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(double)));
    if (!out) throw CheckpointError(CheckpointError::Kind::Io, "short write: " + path);
}

struct LoadedCheckpoint {
    OctonionField field;
    double time = 0.0;
    long step = 0;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointError::Kind::Io, "cannot open for reading: " + path);

    std::string header_line;
    if (!std::getline(in, header_line))
        throw CheckpointError(CheckpointError::Kind::Header, "missing header line: " + path);

    nlohmann::json header = nlohmann::json::parse(header_line, nullptr, /*allow_exceptions=*/false);
    if (header.is_discarded() || !header.is_object())
        throw CheckpointError(CheckpointError::Kind::Header, "unparseable header: " + path);

    LoadedCheckpoint out;
    try {
        std::vector<int> axes = header.at("active_axes").get<std::vector<int>>();
        int n = header.at("n").get<int>();
        double length = header.at("L").get<double>();
        out.field = OctonionField(LatticeSpec(axes, n, length));
        out.time = header.at("time").get<double>();
        out.step = header.at("step").get<long>();
    } catch (const std::exception& e) {
        throw CheckpointError(CheckpointError::Kind::Header,
                              std::string("bad header field: ") + e.what());
    }

    std::vector<double> buffer(out.field.spec.point_count() * 8);
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(buffer.size() * sizeof(double)))
        throw CheckpointError(CheckpointError::Kind::PayloadSize,
                              "payload size mismatch (expected " +
                                  std::to_string(buffer.size() * sizeof(double)) + " bytes): " + path);
    char extra;
    if (in.read(&extra, 1))
        throw CheckpointError(CheckpointError::Kind::PayloadSize,
                              "payload longer than header declares: " + path);

    std::size_t k = 0;
    for (Octonion& o : out.field.values) {
        o.re = detail::from_little_endian(buffer[k++]);
        for (double& x : o.im) x = detail::from_little_endian(buffer[k++]);
        if (!is_finite(o))
            throw CheckpointError(CheckpointError::Kind::NonFinite,
                                  "non-finite value in payload: " + path);
    }
    return out;
}

}  // namespace g2flow
