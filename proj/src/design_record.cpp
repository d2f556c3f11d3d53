#include "spsim/design_record.hpp"

#include <bit>
#include <fstream>
#include <string>

#include "spsim/binary_io.hpp"
#include "spsim/error.hpp"

namespace spsim {

namespace {

constexpr std::string_view kMagic = "SPSDSGN1";
constexpr std::string_view kTrailer = "SPSDEND1";
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 28;

std::uint64_t read_count(std::istream& in, std::string_view what) {
  const auto v = binary::read_u64(in, what);
  if (v > kMaxCount) throw SchemaError("implausible " + std::string(what) + " in design file");
  return v;
}

struct Fnv1a {
  std::uint64_t state = 0xcbf29ce484222325ull;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 0x100000001b3ull;
    }
  }
  void u64(std::uint64_t v) {
    v = binary::to_le(v);
    bytes(&v, sizeof v);
  }
};

}  // namespace

std::size_t DesignRecord::total_sweeps() const {
  std::size_t total = 0;
  for (const auto& c : cycles) total += c.mutation.sweeps();
  return total;
}

void DesignRecord::validate() const {
  if (schema_version != kDesignSchemaVersion) {
    throw SchemaError("unsupported design schema version " + std::to_string(schema_version));
  }
  if (J < 2 || N < 2 || k < 1 || T < 1) throw SchemaError("design has invalid dimensions");
  if (cycles.empty()) throw SchemaError("design has no cycles");
  std::size_t previous = 0;
  for (std::size_t l = 0; l < cycles.size(); ++l) {
    const auto& c = cycles[l];
    if (c.t_end <= previous) throw SchemaError("design cycle ends are not strictly increasing");
    previous = c.t_end;
    if (!c.selected && c.mutation.sweeps() != 0) {
      throw SchemaError("design cycle " + std::to_string(l + 1) + " has sweeps without selection");
    }
    if (!c.selected && l + 1 != cycles.size()) {
      throw SchemaError("only the final design cycle may skip the S and M phases");
    }
    for (const auto& it : c.mutation.iterations) {
      const auto ki = static_cast<Eigen::Index>(k);
      if (it.proposal.covariance.rows() != ki || it.proposal.covariance.cols() != ki) {
        throw SchemaError("design covariance has the wrong shape");
      }
    }
  }
  if (previous != T) throw SchemaError("design cycles do not end at T");
}

std::uint64_t config_hash(const std::string& model_id, std::size_t J, std::size_t N, std::size_t k,
                          std::span<const double> data, ResampleScheme scheme, ProposalKind proposal) {
  Fnv1a h;
  h.u64(model_id.size());
  h.bytes(model_id.data(), model_id.size());
  h.u64(J);
  h.u64(N);
  h.u64(k);
  h.u64(data.size());
  for (double y : data) h.u64(std::bit_cast<std::uint64_t>(y));
  h.u64(static_cast<std::uint64_t>(scheme));
  h.u64(static_cast<std::uint64_t>(proposal));
  return h.state;
}

void write_design(std::ostream& out, const DesignRecord& d) {
  d.validate();
  binary::write_bytes(out, kMagic);
  binary::write_u64(out, d.schema_version);
  binary::write_u64(out, d.model_id.size());
  binary::write_bytes(out, d.model_id);
  for (std::uint64_t v : {d.J, d.N, d.k, d.T}) binary::write_u64(out, v);
  binary::write_u64(out, d.config_hash);
  binary::write_u64(out, d.adaptive_seed);
  binary::write_u64(out, d.replay_seed);
  binary::write_u64(out, static_cast<std::uint64_t>(d.scheme));
  binary::write_u64(out, static_cast<std::uint64_t>(d.proposal));
  for (const auto* dates : {&d.forced_dates, &d.moment_dates}) {
    binary::write_u64(out, dates->size());
    for (std::size_t t : *dates) binary::write_u64(out, t);
  }
  binary::write_u64(out, d.cycles.size());
  for (const auto& c : d.cycles) {
    binary::write_u64(out, c.t_end);
    binary::write_u64(out, (c.selected ? 1u : 0u) | (c.forced ? 2u : 0u));
    binary::write_u64(out, c.mutation.sweeps());
    for (const auto& it : c.mutation.iterations) {
      binary::write_f64(out, it.stepsize);
      binary::write_f64(out, it.acceptance_rate);
      for (std::size_t a = 0; a < d.k; ++a) {
        for (std::size_t b = 0; b < d.k; ++b) {
          binary::write_f64(out, it.proposal.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        }
      }
      if (d.proposal == ProposalKind::independence) {
        for (std::size_t a = 0; a < d.k; ++a) binary::write_f64(out, it.proposal.mean[static_cast<Eigen::Index>(a)]);
      }
    }
  }
  binary::write_bytes(out, kTrailer);
}

DesignRecord read_design(std::istream& in) {
  binary::expect_magic(in, kMagic);
  DesignRecord d;
  d.schema_version = binary::read_u64(in, "schema version");
  if (d.schema_version != kDesignSchemaVersion) {
    throw SchemaError("unsupported design schema version " + std::to_string(d.schema_version));
  }
  d.model_id.resize(read_count(in, "model id length"));
  binary::read_exact(in, d.model_id.data(), d.model_id.size(), "model id");
  d.J = read_count(in, "J");
  d.N = read_count(in, "N");
  d.k = binary::read_u64(in, "k");
  if (d.k > 4096) throw SchemaError("implausible parameter dimension in design file");
  d.T = read_count(in, "T");
  d.config_hash = binary::read_u64(in, "config hash");
  d.adaptive_seed = binary::read_u64(in, "adaptive seed");
  d.replay_seed = binary::read_u64(in, "replay seed");
  const auto scheme = binary::read_u64(in, "scheme");
  if (scheme > 3) throw SchemaError("unknown resampling scheme in design file");
  d.scheme = static_cast<ResampleScheme>(scheme);
  const auto proposal = binary::read_u64(in, "proposal");
  if (proposal > 1) throw SchemaError("unknown proposal kind in design file");
  d.proposal = static_cast<ProposalKind>(proposal);
  for (auto* dates : {&d.forced_dates, &d.moment_dates}) {
    dates->resize(read_count(in, "date count"));
    for (auto& t : *dates) t = binary::read_u64(in, "date");
  }
  d.cycles.resize(read_count(in, "cycle count"));
  const auto ki = static_cast<Eigen::Index>(d.k);
  for (auto& c : d.cycles) {
    c.t_end = binary::read_u64(in, "cycle end");
    const auto flags = binary::read_u64(in, "cycle flags");
    c.selected = (flags & 1u) != 0;
    c.forced = (flags & 2u) != 0;
    c.mutation.iterations.resize(read_count(in, "sweep count"));
    for (auto& it : c.mutation.iterations) {
      it.stepsize = binary::read_f64(in, "stepsize");
      it.acceptance_rate = binary::read_f64(in, "acceptance rate");
      it.proposal.kind = d.proposal;
      it.proposal.covariance.resize(ki, ki);
      for (Eigen::Index a = 0; a < ki; ++a) {
        for (Eigen::Index b = 0; b < ki; ++b) it.proposal.covariance(a, b) = binary::read_f64(in, "covariance");
      }
      if (d.proposal == ProposalKind::independence) {
        it.proposal.mean.resize(ki);
        for (Eigen::Index a = 0; a < ki; ++a) it.proposal.mean[a] = binary::read_f64(in, "proposal mean");
      }
    }
  }
  binary::expect_magic(in, kTrailer);
  for (std::size_t l = 0; l < d.cycles.size(); ++l) d.cycles[l].mutation.cycle = l + 1;
  d.validate();
  return d;
}

void save_design(const std::string& path, const DesignRecord& design) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open design file for writing: " + path);
  write_design(out, design);
  if (!out) throw DataError("failed writing design file: " + path);
}

DesignRecord load_design(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open design file: " + path);
  return read_design(in);
}

}  // namespace spsim
