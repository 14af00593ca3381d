#pragma once
// Public block layout of a recursive instance: which labels form which
// principal/fooling block on which side, together with the permutation sigma
// that produced the labeling.  The layout is public information (the analysis
// always conditions on it), so protocols may receive a pointer to it.

#include <vector>

#include "bbsim/errors.hpp"

namespace bbsim {

enum class Side { U, V };

struct BlockLayout {
    int level = 0;  // recursion depth of the instance this layout describes
    int n = 0;      // number of labels

    std::vector<std::vector<int>> principal;  // sorted label lists, size n_{level-1}
    std::vector<std::vector<int>> fooling;    // sorted label lists, size n_{level-1}-1
    std::vector<Side> principal_side;
    std::vector<Side> fooling_side;
    std::vector<int> sigma;  // pre-permutation label -> public label

    // role_of[label]: 2*i for principal block i, 2*j+1 for fooling block j,
    // -1 for labels outside any block (level-0 layouts have one principal block).
    std::vector<int> role_of;

    void finalize() {
        role_of.assign(n, -1);
        auto mark = [&](const std::vector<int>& labels, int code) {
            for (int v : labels) {
                if (v < 0 || v >= n) throw OutOfRange("layout label out of range");
                if (role_of[v] != -1) throw OutOfRange("layout blocks overlap");
                role_of[v] = code;
            }
        };
        for (size_t i = 0; i < principal.size(); ++i) mark(principal[i], 2 * (int)i);
        for (size_t j = 0; j < fooling.size(); ++j) mark(fooling[j], 2 * (int)j + 1);
    }

    bool is_principal(int label) const { return role_of[label] >= 0 && role_of[label] % 2 == 0; }
    bool is_fooling(int label) const { return role_of[label] >= 0 && role_of[label] % 2 == 1; }
    int principal_index(int label) const { return is_principal(label) ? role_of[label] / 2 : -1; }
    int fooling_index(int label) const { return is_fooling(label) ? role_of[label] / 2 : -1; }

    Side side_of(int label) const {
        if (is_principal(label)) return principal_side[principal_index(label)];
        if (is_fooling(label)) return fooling_side[fooling_index(label)];
        throw OutOfRange("label has no block");
    }
};

} // namespace bbsim
