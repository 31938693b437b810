#ifndef BOTHP_H
#define BOTHP_H

/* C API for the bothp shared library: dual-encoder generative graph
 * self-supervised pre-training, attention-fusion fine-tuning, the synthetic
 * benchmark generator, and the experiment protocols.
 *
 * All functions return a bothp_status; on failure bothp_last_error() holds a
 * UTF-8 message for the calling thread. Objects are opaque handles owned by
 * the caller and released with the matching *_free function. Strings returned
 * through char** are heap-allocated; release with bothp_free_string.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t bothp_status;
#define BOTHP_OK 0
#define BOTHP_ERROR 1             /* I/O or internal failure */
#define BOTHP_ERROR_VALIDATION 2  /* bad inputs, malformed files, broken invariants */
#define BOTHP_ERROR_TRAINING 3    /* optimization aborted (non-finite loss, collapse) */
#define BOTHP_ERROR_ARGUMENT 4    /* null handles, unknown names */

typedef struct bothp_dataset_t bothp_dataset_t;
typedef struct bothp_checkpoint_t bothp_checkpoint_t;
typedef struct bothp_model_t bothp_model_t;

const char* bothp_version(void);
const char* bothp_last_error(void);
void bothp_free_string(char* s);

/* ---- datasets ---- */

/* config_json: generator config (see README for keys); pass "{}" for defaults. */
bothp_status bothp_dataset_generate(const char* config_json, bothp_dataset_t** out);

/* name: "camouflage" | "homophilic". */
bothp_status bothp_dataset_preset(const char* name, uint64_t seed, bothp_dataset_t** out);

bothp_status bothp_dataset_load(const char* dir, bothp_dataset_t** out);
bothp_status bothp_dataset_save(const bothp_dataset_t* ds, const char* dir);

/* JSON summary: num_nodes, feature_dim, relations, split sizes, edge counts,
 * edge homophily when fully labeled. */
bothp_status bothp_dataset_info(const bothp_dataset_t* ds, char** json_out);

/* 2-hop closure of one relation; returns a new dataset. */
bothp_status bothp_dataset_augment_two_hop(const bothp_dataset_t* ds, int32_t relation,
                                           bothp_dataset_t** out);

void bothp_dataset_free(bothp_dataset_t* ds);

/* ---- pre-training ---- */

/* config_json keys: encoder {...}, pretrain {...}; omitted keys use defaults. */
bothp_status bothp_pretrain(const bothp_dataset_t* ds, const char* config_json,
                            bothp_checkpoint_t** out);

bothp_status bothp_checkpoint_save(const bothp_checkpoint_t* ckpt, const char* dir);
bothp_status bothp_checkpoint_load(const char* dir, bothp_checkpoint_t** out);
void bothp_checkpoint_free(bothp_checkpoint_t* ckpt);

/* ---- fine-tuning and inference ---- */

/* ckpt may be NULL for from-scratch training (init_from is forced to random). */
bothp_status bothp_finetune(const bothp_dataset_t* ds, const bothp_checkpoint_t* ckpt,
                            const char* config_json, bothp_model_t** out);

bothp_status bothp_model_save(const bothp_model_t* model, const char* dir);
bothp_status bothp_model_load(const char* dir, bothp_model_t** out);
void bothp_model_free(bothp_model_t* model);

/* split: "train" | "val" | "test". JSON report with the four metrics and
 * confusion counts. */
bothp_status bothp_evaluate(const bothp_model_t* model, const bothp_dataset_t* ds,
                            const char* split, char** report_json_out);

/* predictions.csv: node,probability,label */
bothp_status bothp_predict_csv(const bothp_model_t* model, const bothp_dataset_t* ds,
                               const char* csv_path);

/* embeddings CSV: label,u*,g*,l* at float32 precision */
bothp_status bothp_export_embeddings(const bothp_model_t* model, const bothp_dataset_t* ds,
                                     const char* csv_path);

/* ---- analyses and experiment protocols ---- */

/* artifact_dir: a checkpoint or model directory. JSON report: per-dimension
 * stds, Wilcoxon statistic, one-sided p-value for sigma_l > sigma_g. */
bothp_status bothp_embedding_std_analysis(const char* artifact_dir, const bothp_dataset_t* ds,
                                          char** report_json_out);

/* kind: "labels" | "cross-community" | "prototypes" | "interval" | "ablation".
 * config_json (all optional): run {encoder, pretrain, finetune}, seeds [..],
 * fractions [..], arms [..], variants [..], values [..], num_folds_cap.
 * Writes CSV reports plus run_config.json into out_dir. */
bothp_status bothp_sweep(const bothp_dataset_t* ds, const char* kind, const char* config_json,
                         const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* BOTHP_H */
