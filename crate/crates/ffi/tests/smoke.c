#include <stdio.h>
#include <string.h>

#include "lexfilt.h"

#define CHECK(cond)                                                     \
    do {                                                                \
        if (!(cond)) {                                                  \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,      \
                    lexfilt_last_error());                              \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: smoke VOCAB\n");
        return 2;
    }

    LexfiltVocab *vocab = NULL;
    CHECK(lexfilt_vocab_load(argv[1], &vocab) == LEXFILT_STATUS_OK);
    CHECK(lexfilt_vocab_len(vocab) == 8);

    uint32_t ids[8];
    size_t n = 0;
    CHECK(lexfilt_vocab_tokenize(vocab, "unaffable", ids, 8, &n) == LEXFILT_STATUS_OK);
    CHECK(n == 3 && ids[0] == 5 && ids[1] == 6 && ids[2] == 7);
    CHECK(lexfilt_vocab_tokenize(vocab, "unaffable", ids, 1, &n) == LEXFILT_STATUS_BUFFER_TOO_SMALL);
    CHECK(n == 3);

    const char *terms[] = {"unaffable"};
    LexfiltVocab *bigger = NULL;
    size_t added = 0;
    CHECK(lexfilt_vocab_augment(vocab, terms, 1, &bigger, &added) == LEXFILT_STATUS_OK);
    CHECK(added == 1 && lexfilt_vocab_len(bigger) == 9);
    CHECK(lexfilt_vocab_tokenize(bigger, "unaffable", ids, 8, &n) == LEXFILT_STATUS_OK);
    CHECK(n == 1 && ids[0] == 8);
    lexfilt_vocab_free(bigger);
    lexfilt_vocab_free(vocab);

    const char *texts[] = {"the cat sat", "the dog barked", "the dog barked loud"};
    LexfiltIdfTable *table = NULL;
    CHECK(lexfilt_idf_fit(texts, 3, &table) == LEXFILT_STATUS_OK);
    double idf = 0.0;
    CHECK(lexfilt_idf_get(table, "cat", &idf) == LEXFILT_STATUS_OK);
    CHECK(idf > 0.405465 && idf < 0.405466);
    CHECK(lexfilt_idf_get(table, "zebra", &idf) == LEXFILT_STATUS_NOT_FOUND);
    lexfilt_idf_free(table);

    uint64_t doc_ids[] = {1, 2, 3, 4};
    double scores[] = {0.5, 0.9, 0.5, 0.1};
    uint64_t kept[4];
    CHECK(lexfilt_rank_filter(doc_ids, scores, 4, 0.75, kept, 4, &n) == LEXFILT_STATUS_OK);
    CHECK(n == 3 && kept[0] == 2 && kept[1] == 1 && kept[2] == 3);
    CHECK(lexfilt_rank_filter(doc_ids, scores, 4, 0.0, kept, 4, &n) == LEXFILT_STATUS_INVALID_ARGUMENT);
    CHECK(strlen(lexfilt_last_error()) > 0);

    uint8_t preds[] = {1, 1, 0, 0};
    uint8_t labels[] = {1, 0, 1, 0};
    LexfiltMetrics m;
    CHECK(lexfilt_metrics(preds, labels, 4, &m) == LEXFILT_STATUS_OK);
    CHECK(m.accuracy == 0.5 && m.support[0] == 2 && m.support[1] == 2);

    printf("ok %s\n", lexfilt_version());
    return 0;
}
