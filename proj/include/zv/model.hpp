#pragma once

#include <optional>
#include <vector>

#include "zv/config.hpp"
#include "zv/lora.hpp"
#include "zv/masks.hpp"
#include "zv/rng.hpp"

namespace zv {

enum class Profile { BASE, CHAT };

const char* profile_name(Profile p);
Profile parse_profile(const std::string& s);

// Architecture hyperparameters; the [qformer] config section mirrors these
// field names. Defaults are the toy test configuration; the full-scale
// preset (64 queries over 256x768 image features) is one config edit away.
struct QFormerConfig {
    int num_queries = 4;
    int hidden_dim = 32;
    int num_layers = 2;
    int num_heads = 4;
    int cross_attention_period = 2;
    int vocab_size = 64;
    int max_text_len = 32;
    int image_patches = 8;
    int image_feat_dim = 16;
    int decoder_dim = 32;
    int decoder_layers = 2;
    int decoder_heads = 4;
    int decoder_max_len = 128;
    int ffn_mult = 4;
    float ln_eps = 1e-5f;

    void validate() const;
    static QFormerConfig from_config(const IniConfig& cfg);
};

struct LoraSettings {
    int rank = 8;
    float alpha = 16.0f;
    bool target_vision = true;
    bool target_decoder = true;
    // Chat-profile MULTITASK stage trains adapters too; turn off to restrict
    // adapter training to the scene-aware stage.
    bool enable_multitask = true;

    static LoraSettings from_config(const IniConfig& cfg);
};

struct QFormerOutput {
    Tensor query_states;          // [num_queries x hidden_dim], always present
    Tensor text_states;           // [text_len x hidden_dim] iff text was supplied
    Tensor lm_logits;             // [text_len x vocab_size] iff text was supplied
};

struct AttentionBlock {
    Linear q, k, v, o;
};

struct QFormerLayer {
    AttentionBlock self;
    Param ln_attn_g, ln_attn_b;
    bool has_cross = false;
    AttentionBlock cross;         // k, v project image features into hidden_dim
    Param ln_cross_g, ln_cross_b;
    Linear ff1, ff2;
    Param ln_ffn_g, ln_ffn_b;
};

struct DecoderLayer {
    AttentionBlock self;
    Param ln_attn_g, ln_attn_b;
    Linear ff1, ff2;
    Param ln_ffn_g, ln_ffn_b;
};

// Frozen language-model stand-in: causal over its token axis, fed a prefix
// of projected query tokens that are mutually visible.
struct ToyCausalDecoder {
    int dim = 0, heads = 0, vocab = 0, max_len = 0;
    float ln_eps = 1e-5f;
    Param tok_emb, pos_emb;
    std::vector<DecoderLayer> layers;
    Linear out_head;
};

// logits [len(tokens) x vocab]; empty token list yields empty logits.
Tensor decode(Tape& t, const ToyCausalDecoder& dec, const Tensor& prefix,
              const std::vector<int>& tokens);

Tensor project_queries(Tape& t, const Linear& fc, const Tensor& query_states);

struct Model {
    QFormerConfig cfg;
    Profile profile = Profile::BASE;
    LoraSettings lora_cfg;

    Param queries;                // [num_queries x hidden_dim]
    Param tok_emb, pos_emb;
    std::vector<QFormerLayer> layers;
    Linear lm_head;               // ITG head over the text branch
    Linear itm_head;              // 2-class match head on pooled query states
    Param temperature;            // contrastive temperature, clamped [1e-3, 1]
    Linear vision;                // frozen transform of the image features
    Linear projection;            // hidden_dim -> decoder_dim
    ToyCausalDecoder decoder;

    static Model build(const QFormerConfig& cfg, Profile profile, uint64_t seed,
                       const LoraSettings& lora = {});

    // Deterministic registration order; checkpoints serialize in this order.
    std::vector<Param*> parameters();
    std::vector<const Param*> parameters() const;

    QFormerOutput forward(Tape& t, const Tensor& image, const std::vector<int>* text,
                          MaskMode mode) const;
    QFormerOutput forward_instructed(Tape& t, const Tensor& image,
                                     const std::vector<int>& instruction) const;

    Tensor project_queries(Tape& t, const Tensor& query_states) const {
        return zv::project_queries(t, projection, query_states);
    }
    Tensor decode(Tape& t, const Tensor& prefix, const std::vector<int>& tokens) const {
        return zv::decode(t, decoder, prefix, tokens);
    }

    // Query states for decoder-feeding forwards: instruction-aware when an
    // instruction is supplied, plain bidirectional otherwise.
    Tensor extract_visual_prefix(Tape& t, const Tensor& image,
                                 const std::vector<int>* instruction) const;

    void clamp_temperature();
};

Tensor multi_head_attention(Tape& t, const AttentionBlock& blk, const Tensor& x_q,
                            const Tensor& x_kv, int heads, const BoolMat* mask);

}  // namespace zv
