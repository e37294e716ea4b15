#include <stdio.h>
#include <string.h>
#include "tropfan.h"

int main(void) {
    TfFan *u33 = NULL;
    if (tf_bergman_uniform(3, 3, &u33) != TF_STATUS_OK) return 1;
    size_t ranks[4], len = 0;
    if (tf_chow_ranks(u33, ranks, 4, &len) != TF_STATUS_OK) return 2;
    if (len != 3 || ranks[0] != 1 || ranks[1] != 4 || ranks[2] != 1) return 3;
    bool pass = false;
    int64_t sig[2];
    if (tf_hr_check(u33, "{\"values\": [1, 1, 1, 1, 1, 1]}", &pass, sig, 2, &len) != TF_STATUS_OK) return 4;
    if (!pass || sig[1] != -2) return 5;
    TfFan *bad = NULL;
    if (tf_fan_from_json("{\"rank\": 1}", &bad) != TF_STATUS_PARSE) return 6;
    if (tf_last_error() == NULL || strlen(tf_last_error()) == 0) return 7;
    tf_fan_free(u33);
    printf("ok\n");
    return 0;
}
