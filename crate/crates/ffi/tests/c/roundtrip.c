#include <stdio.h>
#include <string.h>
#include "imbalkit.h"

#define CHECK(call)                                                      \
  do {                                                                   \
    ImbkStatus s_ = (call);                                              \
    if (s_ != IMBK_STATUS_OK) {                                          \
      const char *m_ = imbk_last_error();                                \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, m_ ? m_ : "?"); \
      return 1;                                                          \
    }                                                                    \
  } while (0)

int main(void) {
  double x[40];
  uint32_t y[20];
  for (int i = 0; i < 20; i++) {
    y[i] = i < 15 ? 0 : 1;
    x[2 * i] = y[i] ? 5.0 + 0.1 * i : 0.1 * i;
    x[2 * i + 1] = (double)(i % 3);
  }
  ImbkDataset *ds = NULL;
  CHECK(imbk_dataset_new(x, 20, 2, y, 2, &ds));
  ImbkModel *model = NULL;
  CHECK(imbk_model_fit("ros", ds, NULL, 7, &model));
  double proba[40];
  CHECK(imbk_model_predict_proba(model, x, 20, 2, proba, 40));
  ImbkMetrics m;
  CHECK(imbk_evaluate(y, proba, 20, 2, &m));
  if (m.auprc != 1.0) {
    fprintf(stderr, "auprc %f\n", m.auprc);
    return 1;
  }
  if (imbk_model_fit("nope", ds, NULL, 0, &model) != IMBK_STATUS_UNKNOWN_METHOD) return 1;
  if (strstr(imbk_last_error(), "nope") == NULL) return 1;
  imbk_model_free(model);
  imbk_dataset_free(ds);
  printf("ok %s\n", imbk_version());
  return 0;
}
