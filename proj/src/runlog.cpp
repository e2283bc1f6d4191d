#include "kpz/runlog.hpp"

#include <bit>
#include <filesystem>
#include <fstream>
#include <vector>

#include "kpz/errors.hpp"

namespace kpz {

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const std::string& s) { buf_ += s; }
    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(std::string data, std::string path) : d_(std::move(data)), path_(std::move(path)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(d_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = d_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return d_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (d_.size() - pos_ < n) throw IoError("run log " + path_ + " is truncated");
    }
    std::string d_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

void write_run_log(const std::string& path, const EnsembleStore& store) {
    Writer w;
    w.bytes("KPZL");
    w.u32(kRunLogVersion);
    const std::size_t nx = store.nx();
    w.u32(static_cast<std::uint32_t>(nx));
    w.f64(store.beta());
    w.u32(static_cast<std::uint32_t>(store.fingerprint().size()));
    w.bytes(store.fingerprint());
    for (double v : store.x()) w.f64(v);
    for (double v : store.x_eff()) w.f64(v);
    w.u64(store.records());
    for (std::size_t r = 0; r < store.records(); ++r) {
        w.u32(store.batch(r));
        w.u64(store.replica(r));
        w.u8(store.censored(r) ? 1 : 0);
        for (std::size_t k = 0; k < nx; ++k) w.f64(store.h(r, k));
        for (std::size_t k = 0; k < nx; ++k) w.f64(store.Z(r, k));
        for (std::size_t k = 0; k < nx; ++k) w.f64(store.B(r, k));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write run log " + path);
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw IoError("write failed for run log " + path);
}

EnsembleStore read_run_log(const std::string& path) {
    if (!std::filesystem::exists(path)) throw DependencyError("missing run log " + path + " (run 'simulate' first)");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read run log " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(std::move(data), path);
    if (r.bytes(4) != "KPZL") throw IoError("run log " + path + " has a bad magic number");
    const auto version = r.u32();
    if (version != kRunLogVersion)
        throw IoError("run log " + path + " has version " + std::to_string(version) + ", expected " +
                      std::to_string(kRunLogVersion));
    const std::size_t nx = r.u32();
    const double beta = r.f64();
    const std::string fp = r.bytes(r.u32());
    std::vector<double> x(nx), x_eff(nx);
    for (auto& v : x) v = r.f64();
    for (auto& v : x_eff) v = r.f64();
    const std::uint64_t n = r.u64();
    if (n > r.remaining() / (13 + 24 * nx + (nx == 0 ? 1 : 0)))
        throw IoError("run log " + path + " is truncated");
    EnsembleStore store(std::move(x), std::move(x_eff), beta, fp);
    std::vector<double> h(nx), Z(nx), B(nx);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto batch = r.u32();
        const auto replica = r.u64();
        const bool cens = r.u8() != 0;
        for (auto& v : h) v = r.f64();
        for (auto& v : Z) v = r.f64();
        for (auto& v : B) v = r.f64();
        store.add_record(h, Z, B, batch, replica, cens);
    }
    if (r.remaining() != 0) throw IoError("run log " + path + " has trailing bytes");
    return store;
}

}  // namespace kpz
