#pragma once

// Double-precision reference of the model forward passes and the three
// pre-training losses, recomputed directly from parameter storage. Used as
// the independent oracle for finite-difference gradient checks; it never
// calls the library's tensor ops.

#include <vector>

#include "zv/masks.hpp"
#include "zv/model.hpp"
#include "zv/objectives.hpp"
#include "zv/tokens.hpp"

#include "ref_math.hpp"

namespace refm {

using ref::Mat;

inline Mat param_mat(const zv::Param& p) {
    int cols = p.shape().back();
    int rows = static_cast<int>(p.size()) / cols;
    return ref::from_floats(p.values(), rows, cols);
}

inline Mat linear(const zv::Linear& l, const Mat& x) {
    Mat y = ref::matmul(x, ref::transpose(param_mat(l.w)));
    Mat b = ref::from_floats(l.bias.values(), 1, l.d_out());
    y = ref::add_rowvec(y, b);
    if (l.lora) {
        Mat down = ref::matmul(x, ref::transpose(param_mat(l.lora->a)));
        Mat up = ref::matmul(down, ref::transpose(param_mat(l.lora->b)));
        y = ref::add(y, ref::scale(up, static_cast<double>(l.lora->alpha) / l.lora->rank));
    }
    return y;
}

inline Mat mha(const zv::AttentionBlock& blk, const Mat& xq, const Mat& xkv, int heads,
               const zv::BoolMat* mask) {
    Mat q = linear(blk.q, xq);
    Mat k = linear(blk.k, xkv);
    Mat v = linear(blk.v, xkv);
    int dh = q.cols / heads;
    double sc = 1.0 / std::sqrt(static_cast<double>(dh));
    Mat cat(q.rows, q.cols);
    for (int hd = 0; hd < heads; ++hd) {
        Mat qi(q.rows, dh), ki(k.rows, dh), vi(v.rows, dh);
        for (int i = 0; i < q.rows; ++i)
            for (int j = 0; j < dh; ++j) qi.at(i, j) = q.at(i, hd * dh + j);
        for (int i = 0; i < k.rows; ++i)
            for (int j = 0; j < dh; ++j) {
                ki.at(i, j) = k.at(i, hd * dh + j);
                vi.at(i, j) = v.at(i, hd * dh + j);
            }
        Mat scores = ref::scale(ref::matmul(qi, ref::transpose(ki)), sc);
        Mat p = ref::softmax_rows(scores, mask ? &mask->v : nullptr);
        Mat oi = ref::matmul(p, vi);
        for (int i = 0; i < oi.rows; ++i)
            for (int j = 0; j < dh; ++j) cat.at(i, hd * dh + j) = oi.at(i, j);
    }
    return linear(blk.o, cat);
}

inline Mat ln(const Mat& x, const zv::Param& g, const zv::Param& b, double eps) {
    Mat gm = ref::from_floats(g.values(), 1, static_cast<int>(g.size()));
    Mat bm = ref::from_floats(b.values(), 1, static_cast<int>(b.size()));
    return ref::layernorm(x, gm, bm, eps);
}

inline std::vector<int> with_bos(const std::vector<int>& caption) {
    std::vector<int> out = {zv::kBos};
    out.insert(out.end(), caption.begin(), caption.end());
    return out;
}

inline Mat embed_rows(const zv::Param& table, const std::vector<int>& ids) {
    int d = table.shape()[1];
    Mat out(static_cast<int>(ids.size()), d);
    for (size_t i = 0; i < ids.size(); ++i)
        for (int j = 0; j < d; ++j)
            out.at(static_cast<int>(i), j) = table.values()[static_cast<size_t>(ids[i]) * d + j];
    return out;
}

// Final hidden states, rows = queries then text.
inline Mat qformer_hidden(const zv::Model& m, const Mat& image, const std::vector<int>* text,
                          zv::MaskMode mode) {
    const auto& cfg = m.cfg;
    int text_len = text ? static_cast<int>(text->size()) : 0;
    zv::BoolMat mask = zv::build_attention_mask(mode, cfg.num_queries, text_len);
    Mat img = linear(m.vision, image);

    Mat h = param_mat(m.queries);
    if (text_len > 0) {
        Mat te = embed_rows(m.tok_emb, *text);
        for (int i = 0; i < text_len; ++i)
            for (int j = 0; j < cfg.hidden_dim; ++j)
                te.at(i, j) += m.pos_emb.values()[static_cast<size_t>(i) * cfg.hidden_dim + j];
        h = ref::concat_rows({h, te});
    }

    for (const auto& layer : m.layers) {
        Mat a = mha(layer.self, h, h, cfg.num_heads, &mask);
        h = ln(ref::add(h, a), layer.ln_attn_g, layer.ln_attn_b, cfg.ln_eps);
        if (layer.has_cross) {
            Mat hq = ref::slice_rows(h, 0, cfg.num_queries);
            Mat ca = mha(layer.cross, hq, img, cfg.num_heads, nullptr);
            hq = ln(ref::add(hq, ca), layer.ln_cross_g, layer.ln_cross_b, cfg.ln_eps);
            if (text_len > 0) {
                Mat ht = ref::slice_rows(h, cfg.num_queries, text_len);
                h = ref::concat_rows({hq, ht});
            } else {
                h = hq;
            }
        }
        Mat f = linear(layer.ff2, ref::gelu(linear(layer.ff1, h)));
        h = ln(ref::add(h, f), layer.ln_ffn_g, layer.ln_ffn_b, cfg.ln_eps);
    }
    return h;
}

inline Mat decoder_logits(const zv::Model& m, const Mat& prefix, const std::vector<int>& tokens) {
    const auto& dec = m.decoder;
    int n_tok = static_cast<int>(tokens.size());
    Mat te = embed_rows(dec.tok_emb, tokens);
    for (int i = 0; i < n_tok; ++i)
        for (int j = 0; j < dec.dim; ++j)
            te.at(i, j) += dec.pos_emb.values()[static_cast<size_t>(i) * dec.dim + j];
    Mat h = ref::concat_rows({prefix, te});
    zv::BoolMat mask = zv::decoder_attention_mask(prefix.rows, n_tok);
    for (const auto& layer : dec.layers) {
        Mat a = mha(layer.self, h, h, dec.heads, &mask);
        h = ln(ref::add(h, a), layer.ln_attn_g, layer.ln_attn_b, dec.ln_eps);
        Mat f = linear(layer.ff2, ref::gelu(linear(layer.ff1, h)));
        h = ln(ref::add(h, f), layer.ln_ffn_g, layer.ln_ffn_b, dec.ln_eps);
    }
    return linear(dec.out_head, ref::slice_rows(h, prefix.rows, n_tok));
}

inline Mat image_of_tensor(const zv::Tensor& t) {
    return ref::from_floats(t.values(), t.rows(), t.cols());
}

inline Mat image_of(const zv::Batch& batch, int i) {
    return image_of_tensor(batch.images[static_cast<size_t>(i)]);
}

inline double itc_loss(const zv::Model& m, const zv::Batch& batch) {
    int b = batch.size();
    std::vector<Mat> qn, tn;
    for (int i = 0; i < b; ++i) {
        std::vector<int> text = with_bos(batch.captions[static_cast<size_t>(i)]);
        Mat h = qformer_hidden(m, image_of(batch, i), &text, zv::MaskMode::ITC);
        qn.push_back(ref::l2_normalize_rows(ref::slice_rows(h, 0, m.cfg.num_queries)));
        tn.push_back(ref::l2_normalize_rows(ref::slice_rows(h, m.cfg.num_queries, 1)));
    }
    double tau = m.temperature.values()[0];
    Mat s(b, b);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
            double best = -1e300;
            for (int q = 0; q < m.cfg.num_queries; ++q) {
                double dot = 0.0;
                for (int c = 0; c < m.cfg.hidden_dim; ++c)
                    dot += qn[static_cast<size_t>(i)].at(q, c) * tn[static_cast<size_t>(j)].at(0, c);
                best = std::max(best, dot);
            }
            s.at(i, j) = best / tau;
        }
    std::vector<int> diag(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) diag[static_cast<size_t>(i)] = i;
    return 0.5 * (ref::cross_entropy(s, diag, -1) +
                  ref::cross_entropy(ref::transpose(s), diag, -1));
}

inline double itm_loss(const zv::Model& m, const zv::Batch& batch,
                       const std::vector<int>& negatives) {
    int b = batch.size();
    Mat logits(2 * b, 2);
    std::vector<int> targets;
    for (int i = 0; i < b; ++i) {
        for (int pass = 0; pass < 2; ++pass) {
            int cap = pass == 0 ? i : negatives[static_cast<size_t>(i)];
            std::vector<int> text = with_bos(batch.captions[static_cast<size_t>(cap)]);
            Mat h = qformer_hidden(m, image_of(batch, i), &text, zv::MaskMode::ITM);
            Mat pooled = ref::mean_rows(ref::slice_rows(h, 0, m.cfg.num_queries));
            Mat row = linear(m.itm_head, pooled);
            logits.at(2 * i + pass, 0) = row.at(0, 0);
            logits.at(2 * i + pass, 1) = row.at(0, 1);
            targets.push_back(pass == 0 ? 1 : 0);
        }
    }
    return ref::cross_entropy(logits, targets, -1);
}

inline double itg_loss(const zv::Model& m, const zv::Batch& batch) {
    std::vector<Mat> blocks;
    std::vector<int> targets;
    for (int i = 0; i < batch.size(); ++i) {
        const auto& caption = batch.captions[static_cast<size_t>(i)];
        std::vector<int> text = with_bos(caption);
        Mat h = qformer_hidden(m, image_of(batch, i), &text, zv::MaskMode::ITG);
        Mat states = ref::slice_rows(h, m.cfg.num_queries, static_cast<int>(text.size()));
        blocks.push_back(linear(m.lm_head, states));
        for (size_t p = 0; p < caption.size(); ++p)
            targets.push_back(caption[p] == zv::kPad ? -1 : caption[p]);
        targets.push_back(-1);
    }
    return ref::cross_entropy(ref::concat_rows(blocks), targets, -1);
}

}  // namespace refm
