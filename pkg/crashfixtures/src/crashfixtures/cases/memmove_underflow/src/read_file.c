#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define BUF_SIZE 4096

/* Load a record file and drop the bytes before the payload start
   offset named on the first line. */
int main(int argc, char **argv) {
    unsigned char *buf;
    FILE *fp;
    long start;
    size_t initial_read;

    if (argc < 2) {
        fprintf(stderr, "usage: %s <record-file>\n", argv[0]);
        return 2;
    }
    fp = fopen(argv[1], "rb");
    if (fp == NULL) {
        perror(argv[1]);
        return 2;
    }
    buf = malloc(BUF_SIZE);
    if (buf == NULL || fscanf(fp, "%ld\n", &start) != 1) {
        fclose(fp);
        return 2;
    }
    initial_read = fread(buf, 1, BUF_SIZE, fp);
    fclose(fp);
    memmove(buf, buf + start, initial_read - start);
    printf("kept %zu bytes\n", initial_read - (size_t)start);
    free(buf);
    return 0;
}
