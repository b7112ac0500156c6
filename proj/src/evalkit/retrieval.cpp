#include "zv/evalkit/retrieval.hpp"

#include "zv/common.hpp"

namespace zv::eval {

RetrievalResult retrieval_at_k(const std::vector<std::vector<double>>& sim, int k) {
    int b = static_cast<int>(sim.size());
    require(b >= 1, "retrieval_at_k: empty similarity matrix");
    for (const auto& row : sim)
        require(static_cast<int>(row.size()) == b, "retrieval_at_k: matrix is not square");
    require(k >= 1 && k <= b, "retrieval_at_k: k = {} outside [1, {}]", k, b);

    int ir_hits = 0, tr_hits = 0;
    for (int j = 0; j < b; ++j) {  // texts: search over images in column j
        int rank = 0;
        for (int i = 0; i < b; ++i) {
            if (i == j) continue;
            double v = sim[static_cast<size_t>(i)][static_cast<size_t>(j)];
            double d = sim[static_cast<size_t>(j)][static_cast<size_t>(j)];
            if (v > d || (v == d && i < j)) ++rank;
        }
        if (rank < k) ++ir_hits;
    }
    for (int i = 0; i < b; ++i) {  // images: search over texts in row i
        int rank = 0;
        for (int j = 0; j < b; ++j) {
            if (j == i) continue;
            double v = sim[static_cast<size_t>(i)][static_cast<size_t>(j)];
            double d = sim[static_cast<size_t>(i)][static_cast<size_t>(i)];
            if (v > d || (v == d && j < i)) ++rank;
        }
        if (rank < k) ++tr_hits;
    }
    RetrievalResult r;
    r.ir_at_k = static_cast<double>(ir_hits) / b;
    r.tr_at_k = static_cast<double>(tr_hits) / b;
    return r;
}

RetrievalResult retrieval_at_k(const Tensor& sim, int k) {
    require(sim.defined(), "retrieval_at_k: undefined similarity tensor");
    int b = sim.rows();
    std::vector<std::vector<double>> rows(static_cast<size_t>(b),
                                          std::vector<double>(static_cast<size_t>(b)));
    require(sim.cols() == b, "retrieval_at_k: matrix {} is not square", shape_str(sim.shape()));
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) rows[static_cast<size_t>(i)][static_cast<size_t>(j)] = sim.at(i, j);
    return retrieval_at_k(rows, k);
}

}  // namespace zv::eval
