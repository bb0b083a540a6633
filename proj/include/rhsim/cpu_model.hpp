#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rhsim/address_map.hpp"
#include "rhsim/units.hpp"

namespace rhsim::cpu {

enum class Arch : std::uint8_t { Broadwell, Skylake, Cascadelake };

const char* arch_name(Arch a);
Arch parse_arch(const std::string& s);  ///< throws Error(UnsupportedArch)

enum class Op : std::uint8_t {
    Load, Store, Clflush, Clflushopt, Mfence, Lfence, Sfence, NtLoad, NtStore, UncachedLoad, Invd, Wbinvd, CacheConflictEvict
};

const char* op_name(Op op);
bool op_is_memory(Op op);
bool op_is_fence(Op op);

struct SeqOp {
    Op op = Op::Load;
    int slot = -1;  ///< address slot index for memory ops, -1 otherwise

    friend bool operator==(const SeqOp&, const SeqOp&) = default;
};

struct InstructionSequence {
    std::string name;
    std::vector<std::string> slots;  ///< declared address slots, e.g. {"A", "B"}
    std::vector<SeqOp> body;

    bool has_fence() const;
    /// Throws Error(InvalidConfig): empty body or undeclared slot.
    void validate() const;
    /// Parses "load A; clflushopt A; mfence".
    static InstructionSequence parse(const std::string& name, const std::string& body);
    std::string to_string() const;
};

enum class RequestKind : std::uint8_t { Read, Write, FlushRead };

const char* request_kind_name(RequestKind k);
RequestKind parse_request_kind(const std::string& s);

struct SequenceProfile {
    std::string name;
    Arch arch = Arch::Skylake;
    InstructionSequence sequence;
    RequestKind kind = RequestKind::FlushRead;
    /// Gap after each candidate access of one iteration except the last.
    std::vector<Picos> intra_iteration_gaps;
    /// Gap after the last candidate of an iteration.
    Picos inter_iteration_gap = 0;
    double cache_hit_fraction = 0.0;
    /// False when flushing a line that is not cached causes no DRAM access
    /// (clflush on broadwell): the stream is empty.
    bool dram_access_per_flush_on_invalid_line = true;
    int warmup_iterations = 0;
    std::string fence_free_counterpart;  ///< barrier-free variant of the same body
    bool approximate = false;            ///< calibrated from a CDF plot only

    int requests_per_iteration() const { return static_cast<int>(intra_iteration_gaps.size()) + 1; }
    Picos iteration_period() const;
    void validate() const;
};

/// Catalog of calibrated sequence profiles, INI style: one section per
/// sequence, `<arch>.<key>` lines override a key for one architecture.
class Catalog {
  public:
    static Catalog parse(const std::string& text);
    static Catalog load(const std::string& path);
    static const Catalog& builtin();

    std::vector<std::string> names() const;
    bool contains(const std::string& name) const { return sections_.count(name) != 0; }
    /// Throws Error(UnknownSequence) / Error(UnsupportedArch).
    SequenceProfile profile_for(const std::string& name, Arch arch) const;
    std::vector<Arch> archs(const std::string& name) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::vector<std::string> order_;
};

struct MemoryRequest {
    Picos time = 0;
    RequestKind kind = RequestKind::Read;
    std::uint64_t virtual_addr = 0;

    friend bool operator==(const MemoryRequest&, const MemoryRequest&) = default;
};

/// Lazily generated request stream of one simulated hart. Addresses
/// alternate between the two slots; candidates drawn as cache hits
/// (exactly round(f*100) per block of 100, seeded) are dropped.
class RequestStream {
  public:
    RequestStream(const SequenceProfile& profile, std::array<std::uint64_t, 2> va, Picos start, Picos duration,
                  std::uint64_t seed);

    /// Next surviving request with time < start + duration.
    std::optional<MemoryRequest> next();

    std::uint64_t candidates() const { return candidates_; }
    std::uint64_t hits() const { return hits_; }

  private:
    bool is_hit(std::uint64_t index);

    SequenceProfile profile_;
    std::array<std::uint64_t, 2> va_;
    Picos end_;
    Picos t_;
    std::uint64_t seed_;
    std::uint64_t index_ = 0;
    std::uint64_t candidates_ = 0;
    std::uint64_t hits_ = 0;
    std::uint64_t block_ = ~std::uint64_t{0};
    std::array<bool, 100> block_hits_{};
};

/// Checks that the two addresses share a bank and differ in row, then
/// materializes the stream. Throws AddressesSameRow / AddressesDifferentBanks.
std::vector<MemoryRequest> generate_stream(const SequenceProfile& profile, const addr::MappingConfig& map,
                                           std::array<std::uint64_t, 2> va, Picos duration, std::uint64_t seed,
                                           Picos start = 0);

void check_address_pair(const addr::MappingConfig& map, std::array<std::uint64_t, 2> va);

}  // namespace rhsim::cpu
