// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#include "pnlab/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include <json.hpp>

#include "pnlab/errors.hpp"
#include "pnlab/io.hpp"

namespace pnlab::checkpoint {

using nlohmann::json;

namespace {

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(b)])) << (8 * b);
    return v;
}

json p_to_json(double p) {
    if (std::isinf(p)) return "inf";
    return p;
}

double p_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "inf") return operators::kInfinity;
    return j.get<double>();
}

}  // namespace

std::string encode_values(const std::vector<double>& values) {
    std::string out(kMagic, sizeof kMagic);
    put_u64(out, values.size());
    out.reserve(out.size() + 8 * values.size());
    for (double v : values) put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

std::vector<double> decode_values(const std::string& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw FormatError("checkpoint data: bad magic (expected PNSL1)");
    const std::uint64_t count = get_u64(bytes, 8);
    if (count > (bytes.size() - 16) / 8 || bytes.size() != 16 + 8 * count)
        throw FormatError("checkpoint data: expected " + std::to_string(count) + " values, file holds " +
                          std::to_string((bytes.size() - 16) / 8));
    std::vector<double> values(count);
    for (std::uint64_t k = 0; k < count; ++k)
        values[k] = std::bit_cast<double>(get_u64(bytes, 16 + 8 * k));
    return values;
}

std::filesystem::path sidecar_path(const std::filesystem::path& header) {
    std::filesystem::path p = header;
    p.replace_extension(".bin");
    return p;
}

void write(const std::filesystem::path& header, const Checkpoint& ck) {
    const auto& g = ck.field.grid;
    if (ck.field.values.size() != g.size()) throw FormatError("checkpoint: field size does not match its grid");
    const auto bin = sidecar_path(header);
    json j;
    j["format"] = "PNSL1";
    j["version"] = kVersion;
    j["grid"] = {{"origin_x", g.origin.x}, {"origin_y", g.origin.y}, {"h", g.h}, {"nx", g.nx}, {"ny", g.ny}};
    j["p"] = p_to_json(ck.params.p);
    j["n"] = ck.params.n;
    j["domain"] = {{"kind", geometry::to_string(ck.domain.kind)},
                   {"center_x", ck.domain.center.x},
                   {"center_y", ck.domain.center.y},
                   {"a", ck.domain.a},
                   {"b", ck.domain.b}};
    j["rhs"] = ck.rhs;
    j["dirichlet"] = ck.dirichlet;
    j["epsilon"] = ck.epsilon;
    j["iterations"] = ck.report.iterations;
    j["converged"] = ck.report.converged;
    j["final_update"] = ck.report.final_update;
    j["residual"] = ck.report.residual;
    j["scheme"] = ck.report.scheme;
    j["data"] = bin.filename().string();
    j["count"] = ck.field.values.size();
    // Values first so that a header never points at a missing sidecar.
    io::write_atomic(bin, encode_values(ck.field.values));
    io::write_atomic(header, j.dump(2) + "\n");
}

Checkpoint read(const std::filesystem::path& header) {
    const std::string text = io::read_file(header);
    Checkpoint ck;
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "PNSL1") throw FormatError("checkpoint header: format is not PNSL1");
        if (j.at("version").get<int>() != kVersion) throw FormatError("checkpoint header: unsupported version");
        const auto& jg = j.at("grid");
        geometry::Grid g;
        g.origin = {jg.at("origin_x").get<double>(), jg.at("origin_y").get<double>()};
        g.h = jg.at("h").get<double>();
        g.nx = jg.at("nx").get<int>();
        g.ny = jg.at("ny").get<int>();
        if (!(g.h > 0.0) || g.nx < 2 || g.ny < 2) throw FormatError("checkpoint header: invalid grid");
        ck.params.p = p_from_json(j.at("p"));
        ck.params.n = j.at("n").get<int>();
        const auto& jd = j.at("domain");
        ck.domain.kind = geometry::domain_kind_from_string(jd.at("kind").get<std::string>());
        ck.domain.center = {jd.at("center_x").get<double>(), jd.at("center_y").get<double>()};
        ck.domain.a = jd.at("a").get<double>();
        ck.domain.b = jd.at("b").get<double>();
        ck.rhs = j.at("rhs").get<double>();
        ck.dirichlet = j.at("dirichlet").get<double>();
        ck.epsilon = j.at("epsilon").get<double>();
        ck.report.iterations = j.at("iterations").get<int>();
        ck.report.converged = j.at("converged").get<bool>();
        ck.report.final_update = j.at("final_update").get<double>();
        ck.report.residual = j.at("residual").get<double>();
        ck.report.scheme = j.at("scheme").get<std::string>();
        const auto data = header.parent_path() / j.at("data").get<std::string>();
        const auto count = j.at("count").get<std::uint64_t>();
        if (count != g.size()) throw FormatError("checkpoint header: count does not match nx * ny");
        auto values = decode_values(io::read_file(data));
        if (values.size() != count) throw FormatError("checkpoint data: count differs from header");
        ck.domain.validate();
        const auto cls = geometry::classify_grid(ck.domain, g, ck.epsilon);
        ck.field = GridField(g, cls.tags, 0.0);
        ck.field.values = std::move(values);
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint header: ") + e.what());
    } catch (const ParameterError& e) {
        throw FormatError(std::string("checkpoint header: ") + e.what());
    }
    return ck;
}

}  // namespace pnlab::checkpoint
