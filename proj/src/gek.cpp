#include "qmds/gek.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace qmds {

namespace {

constexpr std::array<char, 4> kMagic{'Q', 'G', 'E', 'K'};
constexpr std::uint32_t kRealTag = 0;
constexpr std::uint32_t kQuaternionTag = 1;

template <typename U>
void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t b = 0; b < sizeof(U); ++b) bytes[b] = static_cast<char>((value >> (8 * b)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw Error(ErrorCode::Io, "truncated GEK file");
    U value = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) value |= static_cast<U>(bytes[b]) << (8 * b);
    return value;
}

void put_double(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
double get_double(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

void write_header(std::ostream& out, std::uint32_t tag, Index m) {
    out.write(kMagic.data(), kMagic.size());
    put_le(out, tag);
    put_le(out, static_cast<std::uint64_t>(m));
}

void check_mask(const Mask& mask, Index m) {
    if (mask.rows() != m || mask.cols() != m) throw Error(ErrorCode::DimensionMismatch, "mask size differs from GEK");
    if (!is_symmetric(mask)) throw Error(ErrorCode::AsymmetricMask, "observation mask is not symmetric");
}

}  // namespace

QuatGekInputs quat_inputs_from_measurements(const MeasurementSet& meas) {
    if (!meas.angles) {
        throw Error(ErrorCode::InvalidConfig, "quaternion GEK needs azimuth/elevation readings (Scenario II)");
    }
    const Index m = meas.size();
    QuatGekInputs in{meas.distance, meas.adoa, Eigen::MatrixX3d(m, 3), meas.angles->azimuth};
    for (Index e = 0; e < m; ++e)
        for (Plane plane : kPlanes)
            in.plane_distance(e, plane) = meas.distance(e) * std::sin(meas.angles->elevation(e, plane));
    return in;
}

QuatGekInputs quat_inputs_from_estimate(const MeasurementSet& meas, const TrueParameters& estimated) {
    const Index m = meas.size();
    if (estimated.size() != m) throw Error(ErrorCode::DimensionMismatch, "estimate and measurements disagree on M");
    QuatGekInputs in{meas.distance, meas.adoa, Eigen::MatrixX3d(m, 3), Eigen::MatrixX3d(m, 3)};
    for (Index e = 0; e < m; ++e) {
        const EdgeParameters& p = estimated.edges[static_cast<std::size_t>(e)];
        for (Plane plane : kPlanes) {
            in.plane_distance(e, plane) = meas.distance(e) * std::sin(p.elevation[plane]);
            in.azimuth(e, plane) = p.azimuth[plane];
        }
    }
    return in;
}

QuatGekInputs quat_inputs_from_truth(const TrueParameters& truth) {
    const Index m = truth.size();
    QuatGekInputs in{Eigen::VectorXd(m), truth.adoa, Eigen::MatrixX3d(m, 3), Eigen::MatrixX3d(m, 3)};
    for (Index e = 0; e < m; ++e) {
        const EdgeParameters& p = truth.edges[static_cast<std::size_t>(e)];
        in.distance(e) = p.distance;
        for (Plane plane : kPlanes) {
            in.plane_distance(e, plane) = p.plane_distance[plane];
            in.azimuth(e, plane) = p.azimuth[plane];
        }
    }
    return in;
}

RealGek build_real_gek(const Eigen::VectorXd& distance, const Eigen::MatrixXd& adoa) {
    const Index m = distance.size();
    if (adoa.rows() != m || adoa.cols() != m) throw Error(ErrorCode::DimensionMismatch, "ADoA matrix must be M×M");
    RealGek g{Eigen::MatrixXd(m, m), {}};
    for (Index a = 0; a < m; ++a) {
        g.k(a, a) = distance(a) * distance(a);
        for (Index b = a + 1; b < m; ++b) {
            const double v = distance(a) * distance(b) * std::cos(adoa(a, b));
            g.k(a, b) = v;
            g.k(b, a) = v;
        }
    }
    return g;
}

RealGek build_real_gek(const MeasurementSet& meas) { return build_real_gek(meas.distance, meas.adoa); }

QuatGek build_quat_gek(const QuatGekInputs& in) {
    const Index m = in.distance.size();
    if (in.adoa.rows() != m || in.adoa.cols() != m || in.plane_distance.rows() != m || in.azimuth.rows() != m) {
        throw Error(ErrorCode::DimensionMismatch, "quaternion GEK inputs disagree on M");
    }
    QuatGek g{QuaternionMatrix(m, m), {}};
    for (Index a = 0; a < m; ++a) {
        g.k(a, a) = Quaternion(in.distance(a) * in.distance(a));
        for (Index b = a + 1; b < m; ++b) {
            auto imag = [&](Plane plane) {
                const double alpha = in.azimuth(b, plane) - in.azimuth(a, plane);
                return -in.plane_distance(a, plane) * in.plane_distance(b, plane) * std::sin(alpha);
            };
            const Quaternion q(in.distance(a) * in.distance(b) * std::cos(in.adoa(a, b)), imag(XY), imag(XZ), imag(YZ));
            g.k(a, b) = q;
            g.k(b, a) = q.conj();
        }
    }
    return g;
}

GekBlocks extract_blocks(const QuaternionMatrix& k, Index n_anchors, Index n_targets) {
    const Index naa = n_anchors * (n_anchors - 1) / 2;
    const Index nat = n_anchors * n_targets;
    if (k.rows() != naa + nat || k.cols() != naa + nat) {
        throw Error(ErrorCode::DimensionMismatch, "GEK size differs from N_A(N_A-1)/2 + N_A N_T");
    }
    return {k.block(0, 0, naa, naa), k.block(0, naa, naa, nat), k.block(naa, naa, nat, nat)};
}

RealGek apply_mask(RealGek gek, const Mask& mask) {
    check_mask(mask, gek.k.rows());
    for (Index a = 0; a < mask.rows(); ++a)
        for (Index b = 0; b < mask.cols(); ++b)
            if (!mask(a, b)) gek.k(a, b) = 0.0;
    gek.mask = mask;
    return gek;
}

QuatGek apply_mask(QuatGek gek, const Mask& mask) {
    check_mask(mask, gek.k.rows());
    for (Index a = 0; a < mask.rows(); ++a)
        for (Index b = 0; b < mask.cols(); ++b)
            if (!mask(a, b)) gek.k(a, b) = Quaternion();
    gek.mask = mask;
    return gek;
}

void write_gek(std::ostream& out, const Eigen::MatrixXd& k) {
    if (k.rows() != k.cols()) throw Error(ErrorCode::DimensionMismatch, "GEK must be square");
    write_header(out, kRealTag, k.rows());
    for (Index r = 0; r < k.rows(); ++r)
        for (Index c = 0; c < k.cols(); ++c) put_double(out, k(r, c));
    if (!out) throw Error(ErrorCode::Io, "failed writing GEK");
}

void write_gek(std::ostream& out, const QuaternionMatrix& k) {
    if (k.rows() != k.cols()) throw Error(ErrorCode::DimensionMismatch, "GEK must be square");
    write_header(out, kQuaternionTag, k.rows());
    for (const Quaternion& q : k.data()) {
        put_double(out, q.w);
        put_double(out, q.x);
        put_double(out, q.y);
        put_double(out, q.z);
    }
    if (!out) throw Error(ErrorCode::Io, "failed writing GEK");
}

void write_gek(const std::filesystem::path& path, const std::variant<Eigen::MatrixXd, QuaternionMatrix>& k) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::visit([&](const auto& m) { write_gek(out, m); }, k);
}

std::variant<Eigen::MatrixXd, QuaternionMatrix> read_gek(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw Error(ErrorCode::Io, "not a GEK file");
    const auto tag = get_le<std::uint32_t>(in);
    const auto m = static_cast<Index>(get_le<std::uint64_t>(in));
    if (tag == kRealTag) {
        Eigen::MatrixXd k(m, m);
        for (Index r = 0; r < m; ++r)
            for (Index c = 0; c < m; ++c) k(r, c) = get_double(in);
        return k;
    }
    if (tag == kQuaternionTag) {
        QuaternionMatrix k(m, m);
        for (Index r = 0; r < m; ++r) {
            for (Index c = 0; c < m; ++c) {
                const double w = get_double(in), x = get_double(in), y = get_double(in), z = get_double(in);
                k(r, c) = Quaternion(w, x, y, z);
            }
        }
        return k;
    }
    throw Error(ErrorCode::Io, "unknown GEK domain tag " + std::to_string(tag));
}

std::variant<Eigen::MatrixXd, QuaternionMatrix> read_gek(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return read_gek(in);
}

}  // namespace qmds
