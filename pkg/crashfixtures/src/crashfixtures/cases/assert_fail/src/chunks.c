#include <assert.h>
#include <stdio.h>

/* How many bytes each worker gets. */
static int plan_chunk(int total, int parts) {
    int chunk_size = total / parts;

    assert(chunk_size > 0);
    return chunk_size;
}

int main(int argc, char **argv) {
    int total, parts;
    FILE *fp;

    if (argc < 2) {
        fprintf(stderr, "usage: %s <plan-file>\n", argv[0]);
        return 2;
    }
    fp = fopen(argv[1], "r");
    if (fp == NULL) {
        perror(argv[1]);
        return 2;
    }
    if (fscanf(fp, "%d %d", &total, &parts) != 2) {
        fprintf(stderr, "bad plan\n");
        fclose(fp);
        return 2;
    }
    fclose(fp);
    if (total <= 0 || parts <= 0) {
        fprintf(stderr, "plan values must be positive\n");
        return 2;
    }
    printf("chunk %d\n", plan_chunk(total, parts));
    return 0;
}
