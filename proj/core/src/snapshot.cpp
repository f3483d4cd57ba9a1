#include "vrmhd/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vrmhd/errors.hpp"

namespace vrmhd {

namespace {

constexpr char kMagic[8] = {'V', 'R', 'M', 'H', 'D', 'S', 'N', 'P'};
constexpr int kVersion = 1;

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

std::uint64_t fnv1a(const char* data, size_t n, std::uint64_t h = 1469598103934665603ull) {
    for (size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ull;
    }
    return h;
}

nlohmann::json geometry(const DeRhamComplex& cx) {
    nlohmann::json axes = nlohmann::json::array();
    for (int a = 0; a < 3; ++a) {
        const Axis& ax = cx.axis(a);
        axes.push_back({{"active", ax.active},
                        {"degree", ax.low.degree()},
                        {"cells", ax.low.n_cells()},
                        {"boundary", ax.low.boundary() == Boundary::Periodic ? "periodic" : "clamped"},
                        {"domain", {ax.low.domain().lo, ax.low.domain().hi}}});
    }
    return axes;
}

struct BlockRef {
    const char* name;
    SpaceTag tag;
    Field State::*member;
};

const BlockRef kBlocks[] = {{"u", SpaceTag::X, &State::u},
                            {"rho", SpaceTag::V3, &State::rho},
                            {"s", SpaceTag::V3, &State::s},
                            {"B", SpaceTag::V2, &State::B}};

} // namespace

void snapshot_write(const std::filesystem::path& path, const DeRhamComplex& cx, const State& st, long step) {
    std::string payload;
    nlohmann::json blocks = nlohmann::json::array();
    for (const BlockRef& b : kBlocks) {
        const Field& f = st.*(b.member);
        if (f.tag != b.tag || f.coeffs.size() != cx.dim(b.tag))
            throw TypeError(std::string("snapshot: field ") + b.name + " does not match the complex");
        blocks.push_back({{"name", b.name}, {"space", to_string(b.tag)}, {"length", f.coeffs.size()}});
        payload.append(reinterpret_cast<const char*>(f.coeffs.data()), sizeof(double) * f.coeffs.size());
    }
    char sum[17];
    std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(fnv1a(payload.data(), payload.size())));
    double t = st.time;
    std::uint64_t tbits;
    std::memcpy(&tbits, &t, sizeof t);
    const nlohmann::json header = {{"format", "vrmhd-snapshot"},
                                   {"version", kVersion},
                                   {"endianness", "little"},
                                   {"scalar", "float64"},
                                   {"step", step},
                                   {"time", st.time},
                                   {"time_bits", tbits},
                                   {"geometry", geometry(cx)},
                                   {"blocks", blocks},
                                   {"payload_bytes", payload.size()},
                                   {"checksum_fnv1a", sum}};
    const std::string h = header.dump();
    const std::uint64_t hlen = h.size();

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IntegrityError("cannot open " + tmp.string() + " for writing");
        out.write(kMagic, sizeof kMagic);
        out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
        out.write(h.data(), h.size());
        out.write(payload.data(), payload.size());
        if (!out) throw IntegrityError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

State snapshot_read(const std::filesystem::path& path, const DeRhamComplex& cx, SnapshotInfo* info) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("cannot open snapshot " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    if (data.size() < sizeof kMagic + 8 || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0)
        throw IntegrityError("not a snapshot file: " + path.string());
    std::uint64_t hlen;
    std::memcpy(&hlen, data.data() + sizeof kMagic, sizeof hlen);
    const size_t hstart = sizeof kMagic + 8;
    if (hlen > data.size() - hstart) throw IntegrityError("truncated snapshot header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(data.begin() + hstart, data.begin() + hstart + hlen);
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("corrupt snapshot header: ") + e.what());
    }
    try {
        if (header.at("version").get<int>() != kVersion) throw IntegrityError("unsupported snapshot version");
        if (header.at("endianness").get<std::string>() != "little") throw IntegrityError("unsupported byte order");
        if (header.at("geometry") != geometry(cx)) throw IntegrityError("snapshot geometry does not match the complex");
        const size_t pstart = hstart + hlen;
        const size_t pbytes = header.at("payload_bytes").get<size_t>();
        if (data.size() - pstart != pbytes) throw IntegrityError("truncated snapshot payload");
        char sum[17];
        std::snprintf(sum, sizeof sum, "%016llx",
                      static_cast<unsigned long long>(fnv1a(data.data() + pstart, pbytes)));
        if (header.at("checksum_fnv1a").get<std::string>() != sum) throw IntegrityError("snapshot checksum mismatch");

        State st;
        size_t off = pstart;
        const auto& blocks = header.at("blocks");
        if (blocks.size() != std::size(kBlocks)) throw IntegrityError("unexpected snapshot block table");
        for (size_t i = 0; i < std::size(kBlocks); ++i) {
            const BlockRef& b = kBlocks[i];
            const auto& jb = blocks[i];
            const long len = jb.at("length").get<long>();
            if (jb.at("name").get<std::string>() != b.name || jb.at("space").get<std::string>() != to_string(b.tag) ||
                len != cx.dim(b.tag))
                throw IntegrityError(std::string("snapshot block ") + b.name + " does not match the complex");
            Field f(b.tag, Eigen::VectorXd(len));
            std::memcpy(f.coeffs.data(), data.data() + off, sizeof(double) * len);
            off += sizeof(double) * len;
            st.*(b.member) = std::move(f);
        }
        const std::uint64_t tbits = header.at("time_bits").get<std::uint64_t>();
        std::memcpy(&st.time, &tbits, sizeof st.time);
        if (info) {
            info->step = header.at("step").get<long>();
            info->time = st.time;
        }
        return st;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("incomplete snapshot header: ") + e.what());
    }
}

} // namespace vrmhd
