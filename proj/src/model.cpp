#include "zv/model.hpp"

#include <cmath>

#include "zv/tokens.hpp"

namespace zv {

const char* profile_name(Profile p) { return p == Profile::BASE ? "base" : "chat"; }

Profile parse_profile(const std::string& s) {
    if (s == "base") return Profile::BASE;
    if (s == "chat") return Profile::CHAT;
    fail("unknown profile '{}', expected base or chat", s);
}

void QFormerConfig::validate() const {
    require(num_queries >= 1, "num_queries must be >= 1, got {}", num_queries);
    require(hidden_dim >= 1 && num_layers >= 1 && num_heads >= 1,
            "hidden_dim/num_layers/num_heads must be positive");
    require(hidden_dim % num_heads == 0, "hidden_dim {} not divisible by num_heads {}", hidden_dim,
            num_heads);
    require(cross_attention_period >= 1 && cross_attention_period <= num_layers,
            "cross_attention_period {} outside [1, {}]", cross_attention_period, num_layers);
    require(vocab_size > kSep, "vocab_size {} too small for the reserved ids", vocab_size);
    require(max_text_len >= 1, "max_text_len must be >= 1");
    require(image_patches >= 1 && image_feat_dim >= 1, "image feature extents must be positive");
    require(decoder_dim >= 1 && decoder_layers >= 1 && decoder_heads >= 1,
            "decoder extents must be positive");
    require(decoder_dim % decoder_heads == 0, "decoder_dim {} not divisible by decoder_heads {}",
            decoder_dim, decoder_heads);
    require(ffn_mult >= 1, "ffn_mult must be >= 1");
}

QFormerConfig QFormerConfig::from_config(const IniConfig& cfg) {
    QFormerConfig c;
    const std::string s = "qformer";
    c.num_queries = static_cast<int>(cfg.get_int(s, "num_queries", c.num_queries));
    c.hidden_dim = static_cast<int>(cfg.get_int(s, "hidden_dim", c.hidden_dim));
    c.num_layers = static_cast<int>(cfg.get_int(s, "num_layers", c.num_layers));
    c.num_heads = static_cast<int>(cfg.get_int(s, "num_heads", c.num_heads));
    c.cross_attention_period =
        static_cast<int>(cfg.get_int(s, "cross_attention_period", c.cross_attention_period));
    c.vocab_size = static_cast<int>(cfg.get_int(s, "vocab_size", c.vocab_size));
    c.max_text_len = static_cast<int>(cfg.get_int(s, "max_text_len", c.max_text_len));
    c.image_patches = static_cast<int>(cfg.get_int(s, "image_patches", c.image_patches));
    c.image_feat_dim = static_cast<int>(cfg.get_int(s, "image_feat_dim", c.image_feat_dim));
    c.decoder_dim = static_cast<int>(cfg.get_int(s, "decoder_dim", c.decoder_dim));
    c.decoder_layers = static_cast<int>(cfg.get_int(s, "decoder_layers", c.decoder_layers));
    c.decoder_heads = static_cast<int>(cfg.get_int(s, "decoder_heads", c.decoder_heads));
    c.decoder_max_len = static_cast<int>(cfg.get_int(s, "decoder_max_len", c.decoder_max_len));
    c.ffn_mult = static_cast<int>(cfg.get_int(s, "ffn_mult", c.ffn_mult));
    c.ln_eps = static_cast<float>(cfg.get_real(s, "ln_eps", c.ln_eps));
    c.validate();
    return c;
}

LoraSettings LoraSettings::from_config(const IniConfig& cfg) {
    LoraSettings l;
    l.rank = static_cast<int>(cfg.get_int("lora", "rank", l.rank));
    l.alpha = static_cast<float>(cfg.get_real("lora", "alpha", l.alpha));
    std::string targets = cfg.get_str("lora", "targets", "vision,decoder");
    l.target_vision = targets.find("vision") != std::string::npos;
    l.target_decoder = targets.find("decoder") != std::string::npos;
    l.enable_multitask = cfg.get_bool("lora", "enable_multitask", l.enable_multitask);
    return l;
}

namespace {

std::vector<float> gaussian_init(size_t n, double stddev, Rng& rng) {
    std::vector<float> v(n);
    for (auto& x : v) x = rng.gaussianf(stddev);
    return v;
}

Param ln_gamma(const std::string& name, int d) {
    return Param(name, {d}, std::vector<float>(static_cast<size_t>(d), 1.0f));
}
Param ln_beta(const std::string& name, int d) {
    return Param(name, {d}, std::vector<float>(static_cast<size_t>(d), 0.0f));
}

AttentionBlock make_attention(const std::string& name, int d_q, int d_kv, int d_model, Rng& rng) {
    AttentionBlock blk;
    blk.q = Linear::make(name + ".q", d_q, d_model, rng);
    blk.k = Linear::make(name + ".k", d_kv, d_model, rng);
    blk.v = Linear::make(name + ".v", d_kv, d_model, rng);
    blk.o = Linear::make(name + ".o", d_model, d_model, rng);
    return blk;
}

void collect_linear(std::vector<Param*>& out, Linear& l) {
    out.push_back(&l.w);
    out.push_back(&l.bias);
}

void collect_attention(std::vector<Param*>& out, AttentionBlock& blk) {
    collect_linear(out, blk.q);
    collect_linear(out, blk.k);
    collect_linear(out, blk.v);
    collect_linear(out, blk.o);
}

void collect_lora(std::vector<Param*>& out, Linear& l) {
    if (!l.lora) return;
    out.push_back(&l.lora->a);
    out.push_back(&l.lora->b);
}

}  // namespace

Model Model::build(const QFormerConfig& cfg, Profile profile, uint64_t seed,
                   const LoraSettings& lora) {
    cfg.validate();
    Model m;
    m.cfg = cfg;
    m.profile = profile;
    m.lora_cfg = lora;
    Rng rng(mix_seed(seed, 0x6d6f64656cull));

    int h = cfg.hidden_dim;
    m.queries = Param("queries.table", {cfg.num_queries, h},
                      gaussian_init(static_cast<size_t>(cfg.num_queries) * h, 0.02, rng));
    m.tok_emb = Param("qformer.tok_emb", {cfg.vocab_size, h},
                      gaussian_init(static_cast<size_t>(cfg.vocab_size) * h, 0.02, rng));
    m.pos_emb = Param("qformer.pos_emb", {cfg.max_text_len, h},
                      gaussian_init(static_cast<size_t>(cfg.max_text_len) * h, 0.02, rng));

    for (int l = 0; l < cfg.num_layers; ++l) {
        std::string base = fmt::format("qformer.layer{}", l);
        QFormerLayer layer;
        layer.self = make_attention(base + ".self", h, h, h, rng);
        layer.ln_attn_g = ln_gamma(base + ".ln_attn.g", h);
        layer.ln_attn_b = ln_beta(base + ".ln_attn.b", h);
        layer.has_cross = (l % cfg.cross_attention_period) == 0;
        if (layer.has_cross) {
            layer.cross = make_attention(base + ".cross", h, cfg.image_feat_dim, h, rng);
            layer.ln_cross_g = ln_gamma(base + ".ln_cross.g", h);
            layer.ln_cross_b = ln_beta(base + ".ln_cross.b", h);
        }
        layer.ff1 = Linear::make(base + ".ffn.1", h, h * cfg.ffn_mult, rng);
        layer.ff2 = Linear::make(base + ".ffn.2", h * cfg.ffn_mult, h, rng);
        layer.ln_ffn_g = ln_gamma(base + ".ln_ffn.g", h);
        layer.ln_ffn_b = ln_beta(base + ".ln_ffn.b", h);
        m.layers.push_back(std::move(layer));
    }
    m.lm_head = Linear::make("qformer.lm_head", h, cfg.vocab_size, rng);
    m.itm_head = Linear::make("itm_head.fc", h, 2, rng);
    m.temperature = Param("temperature.tau", {1}, {0.07f});
    m.vision = Linear::identity("vision.base", cfg.image_feat_dim);
    m.projection = Linear::make("projection.fc", h, cfg.decoder_dim, rng);

    ToyCausalDecoder& dec = m.decoder;
    dec.dim = cfg.decoder_dim;
    dec.heads = cfg.decoder_heads;
    dec.vocab = cfg.vocab_size;
    dec.max_len = cfg.decoder_max_len;
    dec.ln_eps = cfg.ln_eps;
    dec.tok_emb = Param("decoder.tok_emb", {cfg.vocab_size, dec.dim},
                        gaussian_init(static_cast<size_t>(cfg.vocab_size) * dec.dim, 0.02, rng));
    dec.pos_emb = Param("decoder.pos_emb", {dec.max_len, dec.dim},
                        gaussian_init(static_cast<size_t>(dec.max_len) * dec.dim, 0.02, rng));
    for (int l = 0; l < cfg.decoder_layers; ++l) {
        std::string base = fmt::format("decoder.layer{}", l);
        DecoderLayer layer;
        layer.self = make_attention(base + ".self", dec.dim, dec.dim, dec.dim, rng);
        layer.ln_attn_g = ln_gamma(base + ".ln_attn.g", dec.dim);
        layer.ln_attn_b = ln_beta(base + ".ln_attn.b", dec.dim);
        layer.ff1 = Linear::make(base + ".ffn.1", dec.dim, dec.dim * cfg.ffn_mult, rng);
        layer.ff2 = Linear::make(base + ".ffn.2", dec.dim * cfg.ffn_mult, dec.dim, rng);
        layer.ln_ffn_g = ln_gamma(base + ".ln_ffn.g", dec.dim);
        layer.ln_ffn_b = ln_beta(base + ".ln_ffn.b", dec.dim);
        dec.layers.push_back(std::move(layer));
    }
    dec.out_head = Linear::make("decoder.out", dec.dim, cfg.vocab_size, rng);

    // The language-model and vision stand-ins stay frozen in every stage;
    // Chat adapts them through low-rank adapters instead.
    if (profile == Profile::CHAT) {
        if (lora.target_vision) {
            m.vision.lora = LoRAAdapter::make("lora.vision", cfg.image_feat_dim,
                                              cfg.image_feat_dim, lora.rank, lora.alpha, rng);
        }
        if (lora.target_decoder) {
            for (int l = 0; l < cfg.decoder_layers; ++l) {
                std::string base = fmt::format("lora.decoder.layer{}", l);
                DecoderLayer& layer = dec.layers[static_cast<size_t>(l)];
                layer.self.q.lora = LoRAAdapter::make(base + ".q", dec.dim, dec.dim, lora.rank,
                                                      lora.alpha, rng);
                layer.self.k.lora = LoRAAdapter::make(base + ".k", dec.dim, dec.dim, lora.rank,
                                                      lora.alpha, rng);
                layer.self.v.lora = LoRAAdapter::make(base + ".v", dec.dim, dec.dim, lora.rank,
                                                      lora.alpha, rng);
                layer.self.o.lora = LoRAAdapter::make(base + ".o", dec.dim, dec.dim, lora.rank,
                                                      lora.alpha, rng);
            }
        }
    }

    for (Param* p : m.parameters()) {
        bool frozen_base = p->name.rfind("vision.", 0) == 0 || p->name.rfind("decoder.", 0) == 0;
        p->set_requires_grad(!frozen_base);
    }
    return m;
}

std::vector<Param*> Model::parameters() {
    std::vector<Param*> out;
    out.push_back(&queries);
    out.push_back(&tok_emb);
    out.push_back(&pos_emb);
    for (auto& layer : layers) {
        collect_attention(out, layer.self);
        out.push_back(&layer.ln_attn_g);
        out.push_back(&layer.ln_attn_b);
        if (layer.has_cross) {
            collect_attention(out, layer.cross);
            out.push_back(&layer.ln_cross_g);
            out.push_back(&layer.ln_cross_b);
        }
        collect_linear(out, layer.ff1);
        collect_linear(out, layer.ff2);
        out.push_back(&layer.ln_ffn_g);
        out.push_back(&layer.ln_ffn_b);
    }
    collect_linear(out, lm_head);
    collect_linear(out, itm_head);
    out.push_back(&temperature);
    collect_linear(out, vision);
    collect_linear(out, projection);
    out.push_back(&decoder.tok_emb);
    out.push_back(&decoder.pos_emb);
    for (auto& layer : decoder.layers) {
        collect_attention(out, layer.self);
        out.push_back(&layer.ln_attn_g);
        out.push_back(&layer.ln_attn_b);
        collect_linear(out, layer.ff1);
        collect_linear(out, layer.ff2);
        out.push_back(&layer.ln_ffn_g);
        out.push_back(&layer.ln_ffn_b);
    }
    collect_linear(out, decoder.out_head);
    // Adapters last, under the "lora." prefix.
    collect_lora(out, vision);
    for (auto& layer : decoder.layers) {
        collect_lora(out, layer.self.q);
        collect_lora(out, layer.self.k);
        collect_lora(out, layer.self.v);
        collect_lora(out, layer.self.o);
    }
    return out;
}

std::vector<const Param*> Model::parameters() const {
    auto mut = const_cast<Model*>(this)->parameters();
    return std::vector<const Param*>(mut.begin(), mut.end());
}

Tensor multi_head_attention(Tape& t, const AttentionBlock& blk, const Tensor& x_q,
                            const Tensor& x_kv, int heads, const BoolMat* mask) {
    Tensor q = blk.q.apply(t, x_q);
    Tensor k = blk.k.apply(t, x_kv);
    Tensor v = blk.v.apply(t, x_kv);
    int d_model = q.cols();
    require(d_model % heads == 0, "attention width {} not divisible by {} heads", d_model, heads);
    int dh = d_model / heads;
    float sc = 1.0f / std::sqrt(static_cast<float>(dh));
    std::vector<Tensor> outs;
    outs.reserve(static_cast<size_t>(heads));
    for (int hd = 0; hd < heads; ++hd) {
        Tensor qi = slice_cols(q, hd * dh, dh);
        Tensor ki = slice_cols(k, hd * dh, dh);
        Tensor vi = slice_cols(v, hd * dh, dh);
        Tensor scores = scale(matmul(qi, transpose(ki)), sc);
        Tensor p = mask ? softmax_rows(scores, *mask) : softmax_rows(scores);
        outs.push_back(matmul(p, vi));
    }
    return blk.o.apply(t, concat_cols(outs));
}

namespace {

Tensor self_attn_block(Tape& t, const QFormerLayer& layer, const Tensor& h, const BoolMat& mask,
                       int heads, float eps) {
    Tensor a = multi_head_attention(t, layer.self, h, h, heads, &mask);
    return layernorm(add(h, a), layer.ln_attn_g.on(t), layer.ln_attn_b.on(t), eps);
}

Tensor cross_attn_block(Tape& t, const QFormerLayer& layer, const Tensor& hq, const Tensor& img,
                        int heads, float eps) {
    Tensor a = multi_head_attention(t, layer.cross, hq, img, heads, nullptr);
    return layernorm(add(hq, a), layer.ln_cross_g.on(t), layer.ln_cross_b.on(t), eps);
}

Tensor ffn_block(Tape& t, const Linear& ff1, const Linear& ff2, const Param& g, const Param& b,
                 const Tensor& h, float eps) {
    Tensor f = ff2.apply(t, gelu(ff1.apply(t, h)));
    return layernorm(add(h, f), g.on(t), b.on(t), eps);
}

}  // namespace

QFormerOutput Model::forward(Tape& t, const Tensor& image, const std::vector<int>* text,
                             MaskMode mode) const {
    require(image.defined(), "forward: image features required");
    require(image.rows() == cfg.image_patches && image.cols() == cfg.image_feat_dim,
            "forward: image features {} do not match configured {}x{}", shape_str(image.shape()),
            cfg.image_patches, cfg.image_feat_dim);
    int text_len = text ? static_cast<int>(text->size()) : 0;
    require(text_len <= cfg.max_text_len, "forward: text length {} exceeds max_text_len {}",
            text_len, cfg.max_text_len);

    BoolMat mask = build_attention_mask(mode, cfg.num_queries, text_len);
    Tensor img = vision.apply(t, image);

    Tensor h = queries.on(t);
    if (text_len > 0) {
        Tensor te = embed(tok_emb.on(t), *text);
        Tensor pe = slice_rows(pos_emb.on(t), 0, text_len);
        h = concat_rows({h, add(te, pe)});
    }

    for (size_t l = 0; l < layers.size(); ++l) {
        const QFormerLayer& layer = layers[l];
        h = self_attn_block(t, layer, h, mask, cfg.num_heads, cfg.ln_eps);
        if (layer.has_cross) {
            if (text_len > 0) {
                Tensor hq = slice_rows(h, 0, cfg.num_queries);
                Tensor ht = slice_rows(h, cfg.num_queries, text_len);
                hq = cross_attn_block(t, layer, hq, img, cfg.num_heads, cfg.ln_eps);
                h = concat_rows({hq, ht});
            } else {
                h = cross_attn_block(t, layer, h, img, cfg.num_heads, cfg.ln_eps);
            }
        }
        h = ffn_block(t, layer.ff1, layer.ff2, layer.ln_ffn_g, layer.ln_ffn_b, h, cfg.ln_eps);
    }

    QFormerOutput out;
    if (text_len > 0) {
        out.query_states = slice_rows(h, 0, cfg.num_queries);
        out.text_states = slice_rows(h, cfg.num_queries, text_len);
        out.lm_logits = lm_head.apply(t, out.text_states);
    } else {
        out.query_states = h;
    }
    return out;
}

QFormerOutput Model::forward_instructed(Tape& t, const Tensor& image,
                                        const std::vector<int>& instruction) const {
    require(!instruction.empty(),
            "forward_instructed: empty instruction; call forward() without text instead");
    return forward(t, image, &instruction, MaskMode::INSTRUCTION);
}

Tensor Model::extract_visual_prefix(Tape& t, const Tensor& image,
                                    const std::vector<int>* instruction) const {
    QFormerOutput out;
    if (instruction && !instruction->empty()) {
        out = forward_instructed(t, image, *instruction);
    } else {
        out = forward(t, image, nullptr, MaskMode::ITM);
    }
    return project_queries(t, out.query_states);
}

void Model::clamp_temperature() {
    float& tau = temperature.values()[0];
    tau = std::clamp(tau, 1e-3f, 1.0f);
}

Tensor project_queries(Tape& t, const Linear& fc, const Tensor& query_states) {
    require(query_states.cols() == fc.d_in(),
            "project_queries: states {} do not match projection {}",
            shape_str(query_states.shape()), shape_str(fc.w.shape()));
    return fc.apply(t, query_states);
}

Tensor decode(Tape& t, const ToyCausalDecoder& dec, const Tensor& prefix,
              const std::vector<int>& tokens) {
    require(prefix.defined() && prefix.cols() == dec.dim,
            "decode: prefix {} does not match decoder width {}", shape_str(prefix.shape()),
            dec.dim);
    int n_tok = static_cast<int>(tokens.size());
    if (n_tok == 0) return Tensor({0, dec.vocab}, {});
    require(n_tok <= dec.max_len, "decode: {} tokens exceed decoder max_len {}", n_tok,
            dec.max_len);

    int prefix_len = prefix.rows();
    Tensor te = embed(dec.tok_emb.on(t), tokens);
    Tensor pe = slice_rows(dec.pos_emb.on(t), 0, n_tok);
    Tensor h = concat_rows({prefix, add(te, pe)});
    BoolMat mask = decoder_attention_mask(prefix_len, n_tok);

    for (const DecoderLayer& layer : dec.layers) {
        Tensor a = multi_head_attention(t, layer.self, h, h, dec.heads, &mask);
        h = layernorm(add(h, a), layer.ln_attn_g.on(t), layer.ln_attn_b.on(t), dec.ln_eps);
        h = ffn_block(t, layer.ff1, layer.ff2, layer.ln_ffn_g, layer.ln_ffn_b, h, dec.ln_eps);
    }
    Tensor token_states = slice_rows(h, prefix_len, n_tok);
    return dec.out_head.apply(t, token_states);
}

}  // namespace zv
