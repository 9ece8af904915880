#include "coopcache/interface.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

namespace coopcache {

namespace {

constexpr std::string_view kInstructions =
    "INSTRUCTIONS\n"
    "Reply with exactly one decision line per BS, in ascending BS order, and "
    "nothing else.\n"
    "Each line is either\n"
    "BS <b>: NOOP\n"
    "or\n"
    "BS <b>: SWAP slot=<z> out=<f_out> in=<f_in>\n"
    "CACHE lists the file held in each slot, slot 1 first; _ marks an empty "
    "slot.\n"
    "REQUESTS lists file:count pairs requested at the BS in this slot.\n"
    "FREQ w=<w> lists file:rate, the fraction of the last w slots in which "
    "the file was requested at the BS.\n"
    "A SWAP is feasible only if: in is requested at BS b in this slot; in is "
    "not already cached at BS b; out is the file stored in slot z of BS b.\n";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool consume(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

// Positive decimal, no sign, no leading zero, at most 9 digits.
std::optional<int> consume_number(std::string_view& s) {
  std::size_t n = 0;
  while (n < s.size() && s[n] >= '0' && s[n] <= '9') ++n;
  if (n == 0 || n > 9 || s[0] == '0') return std::nullopt;
  int value = 0;
  std::from_chars(s.data(), s.data() + n, value);
  s.remove_prefix(n);
  return value;
}

struct DecisionLine {
  int bs = 0;  // 1-based as written
  BsAction action;
};

std::optional<DecisionLine> parse_line(std::string_view line) {
  DecisionLine out;
  if (!consume(line, "BS ")) return std::nullopt;
  auto bs = consume_number(line);
  if (!bs || !consume(line, ": ")) return std::nullopt;
  out.bs = *bs;
  if (line == "NOOP") {
    out.action = NoOp{};
    return out;
  }
  Replace r;
  if (!consume(line, "SWAP slot=")) return std::nullopt;
  auto z = consume_number(line);
  if (!z || !consume(line, " out=")) return std::nullopt;
  auto f_out = consume_number(line);
  if (!f_out || !consume(line, " in=")) return std::nullopt;
  auto f_in = consume_number(line);
  if (!f_in || !line.empty()) return std::nullopt;
  r.slot = *z;
  r.out = *f_out;
  r.in = *f_in;
  out.action = r;
  return out;
}

InvalidReason to_reason(FeasibilityRule rule) {
  switch (rule) {
    case FeasibilityRule::kAdmissibility: return InvalidReason::kAdmissibility;
    case FeasibilityRule::kDuplication: return InvalidReason::kDuplication;
    case FeasibilityRule::kConsistency: return InvalidReason::kConsistency;
  }
  return InvalidReason::kSyntax;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace

SlotObservation SlotObservation::build(int t, const CacheState& cache,
                                       const RequestSlot& requests,
                                       const FrequencyTracker& tracker) {
  if (cache.num_bs() != requests.num_bs() || cache.num_bs() != tracker.num_bs()) {
    throw StructuralError("observation parts disagree on BS count");
  }
  SlotObservation obs;
  obs.t = t;
  obs.cache = cache;
  obs.requests = requests;
  obs.freq.resize(static_cast<std::size_t>(cache.num_bs()));
  for (int b = 0; b < cache.num_bs(); ++b) {
    std::set<FileId> relevant;
    for (FileId f : cache.slots(b)) {
      if (f != kEmptySlot) relevant.insert(f);
    }
    for (const auto& fc : requests.counts(b)) relevant.insert(fc.file);
    for (std::size_t k = 0; k < tracker.windows().size(); ++k) {
      WindowFeatures wf;
      wf.window = tracker.windows()[k];
      wf.denominator = tracker.denominator(k);
      for (FileId f : relevant) wf.counts.push_back({f, tracker.count(b, f, k)});
      obs.freq[b].push_back(std::move(wf));
    }
  }
  return obs;
}

std::string format_rate(int numerator, int denominator) {
  if (denominator <= 0) return "0.000";
  long long scaled = 1000LL * numerator;
  long long q = scaled / denominator;
  long long r = scaled % denominator;
  if (2 * r > denominator || (2 * r == denominator && (q % 2) == 1)) ++q;
  std::string frac = std::to_string(q % 1000);
  return std::to_string(q / 1000) + "." + std::string(3 - frac.size(), '0') +
         frac;
}

std::string encode(const SlotObservation& obs) {
  std::ostringstream out;
  out << "SLOT " << obs.t << '\n';
  for (int b = 0; b < obs.num_bs(); ++b) {
    const int label = b + 1;
    out << "BS " << label << " CACHE:";
    for (FileId f : obs.cache.slots(b)) {
      out << ' ';
      if (f == kEmptySlot) {
        out << '_';
      } else {
        out << f;
      }
    }
    out << '\n';

    std::vector<FileCount> reqs(obs.requests.counts(b).begin(),
                                obs.requests.counts(b).end());
    std::stable_sort(reqs.begin(), reqs.end(),
                     [](const FileCount& a, const FileCount& c) {
                       if (a.count != c.count) return a.count > c.count;
                       return a.file < c.file;
                     });
    out << "BS " << label << " REQUESTS:";
    for (const auto& fc : reqs) out << ' ' << fc.file << ':' << fc.count;
    out << '\n';

    if (static_cast<std::size_t>(b) < obs.freq.size()) {
      for (const auto& wf : obs.freq[b]) {
        out << "BS " << label << " FREQ w=" << wf.window << ':';
        for (const auto& fc : wf.counts) {
          out << ' ' << fc.file << ':' << format_rate(fc.count, wf.denominator);
        }
        out << '\n';
      }
    }
  }
  out << kInstructions;
  return out.str();
}

JointAction parse(std::string_view text, const SlotObservation& obs) {
  std::vector<DecisionLine> decisions;
  for (std::string_view raw : split_lines(text)) {
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    auto d = parse_line(line);
    if (!d) {
      std::string shown(line.substr(0, 60));
      return JointAction::invalid(InvalidReason::kSyntax,
                                  "unrecognized line: " + shown);
    }
    if (static_cast<int>(decisions.size()) <= obs.num_bs()) {
      decisions.push_back(*d);
    }
  }
  if (static_cast<int>(decisions.size()) != obs.num_bs()) {
    return JointAction::invalid(
        InvalidReason::kCount,
        "expected " + std::to_string(obs.num_bs()) + " decision lines");
  }
  for (int b = 0; b < obs.num_bs(); ++b) {
    if (decisions[b].bs != b + 1) {
      return JointAction::invalid(
          InvalidReason::kOrder, "line " + std::to_string(b + 1) + " names BS " +
                                     std::to_string(decisions[b].bs));
    }
  }
  std::vector<BsAction> actions;
  actions.reserve(decisions.size());
  for (int b = 0; b < obs.num_bs(); ++b) {
    if (auto rule = check_feasible(obs.cache, b, decisions[b].action,
                                   obs.requests)) {
      return JointAction::invalid(to_reason(*rule),
                                  "BS " + std::to_string(b + 1));
    }
    actions.push_back(decisions[b].action);
  }
  return JointAction::valid(std::move(actions));
}

std::string serialize_line(int bs, const BsAction& action) {
  std::string line = "BS " + std::to_string(bs + 1) + ": ";
  if (const auto* r = std::get_if<Replace>(&action)) {
    line += "SWAP slot=" + std::to_string(r->slot) +
            " out=" + std::to_string(r->out) + " in=" + std::to_string(r->in);
  } else {
    line += "NOOP";
  }
  return line;
}

std::string serialize(const JointAction& action) {
  if (!action.is_valid()) {
    throw StructuralError("cannot serialize an Invalid joint action");
  }
  std::string out;
  const auto& per_bs = action.actions();
  for (int b = 0; b < static_cast<int>(per_bs.size()); ++b) {
    out += serialize_line(b, per_bs[b]);
    out += '\n';
  }
  return out;
}

SlotObservation decode_prompt(std::string_view prompt) {
  auto fail = [](const std::string& msg) -> StructuralError {
    return StructuralError("not an encoded prompt: " + msg);
  };
  auto lines = split_lines(prompt);
  if (lines.empty()) throw fail("empty");
  std::string_view head = lines[0];
  if (!consume(head, "SLOT ")) throw fail("missing SLOT header");
  int t = 0;
  auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), t);
  if (ec != std::errc() || p != head.data() + head.size()) {
    throw fail("bad slot index");
  }

  std::vector<std::vector<FileId>> slots;
  std::vector<std::vector<FileCount>> counts;
  FileId max_file = 1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line == "INSTRUCTIONS") break;
    if (!consume(line, "BS ")) throw fail("unexpected line");
    auto bs = consume_number(line);
    if (!bs) throw fail("bad BS index");
    if (consume(line, " CACHE:")) {
      if (*bs != static_cast<int>(slots.size()) + 1) throw fail("BS order");
      std::vector<FileId> row;
      while (consume(line, " ")) {
        if (consume(line, "_")) {
          row.push_back(kEmptySlot);
          continue;
        }
        auto f = consume_number(line);
        if (!f) throw fail("bad cache entry");
        row.push_back(*f);
        max_file = std::max(max_file, *f);
      }
      if (!line.empty() || row.empty()) throw fail("bad CACHE line");
      slots.push_back(std::move(row));
    } else if (consume(line, " REQUESTS:")) {
      if (*bs != static_cast<int>(slots.size()) ||
          counts.size() + 1 != slots.size()) {
        throw fail("REQUESTS out of place");
      }
      std::vector<FileCount> row;
      while (consume(line, " ")) {
        auto f = consume_number(line);
        if (!f || !consume(line, ":")) throw fail("bad request entry");
        auto n = consume_number(line);
        if (!n) throw fail("bad request count");
        row.push_back({*f, *n});
        max_file = std::max(max_file, *f);
      }
      if (!line.empty()) throw fail("bad REQUESTS line");
      counts.push_back(std::move(row));
    } else if (consume(line, " FREQ w=")) {
      if (*bs != static_cast<int>(slots.size())) throw fail("FREQ out of place");
    } else {
      throw fail("unknown BS field");
    }
  }
  if (slots.empty() || counts.size() != slots.size()) {
    throw fail("incomplete BS blocks");
  }
  SlotObservation obs;
  obs.t = t;
  obs.cache = CacheState::from_slots(max_file, std::move(slots));
  obs.requests = RequestSlot::from_counts(std::move(counts));
  obs.freq.resize(static_cast<std::size_t>(obs.cache.num_bs()));
  return obs;
}

}  // namespace coopcache
