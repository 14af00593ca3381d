#include "bbsim/model.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "bbsim/errors.hpp"

namespace bbsim {

void validate_output(const Output& out, int n) {
    if (std::holds_alternative<MisOutput>(out)) {
        const auto& s = std::get<MisOutput>(out).vertices;
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] < 0 || s[i] >= n) throw OutOfRange("output vertex out of range");
            if (i > 0 && s[i] <= s[i - 1]) throw OutOfRange("output set must be sorted unique");
        }
    } else {
        const auto& ps = std::get<MatchingOutput>(out).pairs;
        std::vector<char> used(n, 0);
        for (const auto& [u, v] : ps) {
            if (u < 0 || v < 0 || u >= n || v >= n) throw OutOfRange("output pair out of range");
            if (u == v) throw NotDisjoint("pair uses one vertex twice");
            if (used[u] || used[v]) throw NotDisjoint("pairs share a vertex");
            used[u] = used[v] = 1;
        }
    }
}

int Transcript::max_bits() const {
    size_t m = 0;
    for (const auto& r : rounds)
        for (const auto& b : r) m = std::max(m, b.size());
    return static_cast<int>(m);
}

std::string transcript_to_json(const Transcript& t) {
    nlohmann::ordered_json j;
    auto rounds = nlohmann::ordered_json::array();
    for (const auto& r : t.rounds) {
        nlohmann::ordered_json jr;
        jr["messages"] = r;
        rounds.push_back(jr);
    }
    j["rounds"] = rounds;
    return j.dump();
}

Transcript transcript_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (!j.contains("rounds")) throw ConfigError("transcript json needs field rounds");
    Transcript t;
    for (const auto& jr : j["rounds"]) {
        std::vector<Bits> msgs;
        for (const auto& m : jr.at("messages")) {
            Bits b = m.get<std::string>();
            for (char c : b)
                if (c != '0' && c != '1') throw ConfigError("message must be a 0/1 string");
            msgs.push_back(std::move(b));
        }
        if (!t.rounds.empty() && t.rounds[0].size() != msgs.size())
            throw ConfigError("transcript rounds disagree on player count");
        t.rounds.push_back(std::move(msgs));
    }
    return t;
}

static void check_bits(const Bits& b) {
    for (char c : b)
        if (c != '0' && c != '1') throw OutOfRange("protocol emitted a non-0/1 character");
}

RunResult run_with_coins(const Graph& g, const BlockLayout* layout, const Protocol& p,
                         const PublicCoins& pub, RunOptions opts) {
    RunResult res;
    res.transcript.rounds.reserve(p.rounds);
    for (int t = 0; t < p.rounds; ++t) {
        std::vector<Bits> round(g.n);
        for (int v = 0; v < g.n; ++v) {
            MsgCtx ctx{t, res.transcript, pub, PrivateCoins{pub.seed, v}, layout};
            round[v] = p.message(vertex_view(g, v), ctx);
            check_bits(round[v]);
            int len = static_cast<int>(round[v].size());
            res.max_bits = std::max(res.max_bits, len);
            if (len > p.bandwidth) {
                BandwidthExceeded err(v, t, len, p.bandwidth);
                if (!opts.diagnostic) throw err;
                res.violations.push_back(err);
            }
        }
        // all round-t messages are computed from rounds < t; post them together
        res.transcript.rounds.push_back(std::move(round));
    }
    RefCtx rctx{pub, layout};
    res.output = p.referee(res.transcript, rctx);
    validate_output(res.output, g.n);
    return res;
}

RunResult run_protocol(const Graph& g, const BlockLayout* layout, const Protocol& p,
                       uint64_t seed, RunOptions opts) {
    return run_with_coins(g, layout, p, PublicCoins{seed}, opts);
}

} // namespace bbsim
