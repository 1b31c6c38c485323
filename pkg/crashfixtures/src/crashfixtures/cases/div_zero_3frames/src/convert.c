#include <stdio.h>

/* Rows that land in one subsampling step. */
static int average_rows(int height, int subsample) {
    return height / subsample;
}

static int convert_image(int width, int height, int subsample) {
    int rows = average_rows(height, subsample);

    return rows * width;
}

int main(int argc, char **argv) {
    int width, height, subsample;
    FILE *fp;

    if (argc < 2) {
        fprintf(stderr, "usage: %s <header-file>\n", argv[0]);
        return 2;
    }
    fp = fopen(argv[1], "r");
    if (fp == NULL) {
        perror(argv[1]);
        return 2;
    }
    if (fscanf(fp, "%d %d %d", &width, &height, &subsample) != 3) {
        fprintf(stderr, "bad header\n");
        fclose(fp);
        return 2;
    }
    fclose(fp);
    printf("cells %d\n", convert_image(width, height, subsample));
    return 0;
}
