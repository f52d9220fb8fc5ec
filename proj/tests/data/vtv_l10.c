// vtv at level 10
static void vtv_level_10(double * RESTRICT _data_dst_vertex, double const * RESTRICT const _data_src_vertex, double const * RESTRICT const _data_vtv)
{
   const double xi_0 = _data_vtv[0];
   const double xi_1 = _data_vtv[1];
   const double xi_2 = _data_vtv[2];
   const double xi_3 = _data_vtv[3];
   const double xi_4 = _data_vtv[4];
   const double xi_5 = _data_vtv[5];
   const double xi_6 = _data_vtv[6];
   for (int ctr_2 = 1; ctr_2 < 1024; ctr_2 += 1)
   {
      for (int ctr_1 = 1; ctr_1 < 1024 - ctr_2; ctr_1 += 1)
      {
         const double xi_7 = _data_src_vertex[ctr_1 + 1026*ctr_2 - ((ctr_2*(ctr_2 - 1)) / (2)) - 1025];
         const double xi_8 = _data_src_vertex[ctr_1 + 1026*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2)) + 1];
         const double xi_9 = _data_src_vertex[ctr_1 + 1026*ctr_2 - ((ctr_2*(ctr_2 - 1)) / (2)) - 1026];
         const double xi_10 = _data_src_vertex[ctr_1 + 1026*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))];
         const double xi_11 = _data_src_vertex[ctr_1 + 1026*ctr_2 - (((ctr_2 + 1)*(ctr_2 + 2)) / (2)) + 1026];
         const double xi_12 = _data_src_vertex[ctr_1 + 1026*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2)) - 1];
         const double xi_13 = _data_src_vertex[ctr_1 + 1026*ctr_2 - (((ctr_2 + 1)*(ctr_2 + 2)) / (2)) + 1025];
         _data_dst_vertex[ctr_1 + 1026*ctr_2 - ((ctr_2*(ctr_2 + 1)) / (2))] = xi_0*xi_7 + xi_1*xi_8 + xi_2*xi_9 + xi_3*xi_10 + xi_4*xi_11 + xi_5*xi_12 + xi_6*xi_13;
      }
   }
}
