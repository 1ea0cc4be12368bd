#include <stdio.h>
#include <string.h>
#include "surveilcorr.h"

static const char *CSV =
    "index,district,province,W1,W2,W3,W4,W5,W6,W7,W8,W9,W10,W11,W12\n"
    "1,A,P,3,9,4,7,12,5,6,11,2,8,10,4\n"
    "2,B,P,5,4,10,6,8,13,4,7,12,3,9,11\n";

int main(void) {
    ScTable *t = NULL;
    if (sc_table_parse((const uint8_t *)CSV, strlen(CSV), &t) != SC_STATUS_OK) return 1;
    ScScoreMatrix *m = NULL;
    if (sc_score_matrix_compute(t, 5, 0, 0, false, 1, &m) != SC_STATUS_OK) return 2;
    double s = 0.0;
    bool present = false;
    if (sc_score_matrix_get(m, 1, 2, &s, &present) != SC_STATUS_OK || !present) return 3;
    if (sc_score_matrix_get(m, 1, 7, &s, &present) != SC_STATUS_INVALID_ARGUMENT) return 4;
    if (strlen(sc_last_error_message()) == 0) return 5;
    printf("%.6f\n", s);
    sc_score_matrix_free(m);
    sc_table_free(t);
    return 0;
}
